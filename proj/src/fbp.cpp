#include "mutomo/fbp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "mutomo/error.hpp"
#include "mutomo/parallel.hpp"

namespace mutomo {

namespace {

// FFTW's planner is not thread-safe; execution with new-array calls is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

struct RampFilter::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

RampFilter::RampFilter(int n_r) : n_r_(n_r), n_pad_(next_pow2(std::max(2 * n_r, 2))), plans_(std::make_unique<Plans>()) {
  if (n_r <= 0) throw InvalidArgument("RampFilter: n_r must be > 0");
  const int nc = n_pad_ / 2 + 1;
  double* real = fftw_alloc_real(static_cast<std::size_t>(n_pad_));
  fftw_complex* spec = fftw_alloc_complex(static_cast<std::size_t>(nc));
  {
    std::lock_guard lock(planner_mutex());
    plans_->forward = fftw_plan_dft_r2c_1d(n_pad_, real, spec, FFTW_ESTIMATE);
    plans_->backward = fftw_plan_dft_c2r_1d(n_pad_, spec, real, FFTW_ESTIMATE);
  }

  // Band-limited spatial ramp kernel sampled at unit spacing.
  constexpr double pi = std::numbers::pi;
  std::fill(real, real + n_pad_, 0.0);
  real[0] = 0.25;
  for (int k = 1; k <= n_pad_ / 2; k += 2) {
    const double h = -1.0 / (pi * pi * k * k);
    real[k] = h;
    real[n_pad_ - k] = h;
  }
  fftw_execute_dft_r2c(plans_->forward, real, spec);
  response_.resize(static_cast<std::size_t>(nc));
  for (int k = 0; k < nc; ++k) response_[static_cast<std::size_t>(k)] = 2.0 * spec[k][0];

  fftw_free(real);
  fftw_free(spec);
}

RampFilter::~RampFilter() {
  std::lock_guard lock(planner_mutex());
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->backward) fftw_destroy_plan(plans_->backward);
}

void RampFilter::apply(std::span<double> profile) const {
  if (static_cast<int>(profile.size()) != n_r_) throw InvalidArgument("RampFilter::apply: length mismatch");
  const int nc = n_pad_ / 2 + 1;
  double* real = fftw_alloc_real(static_cast<std::size_t>(n_pad_));
  fftw_complex* spec = fftw_alloc_complex(static_cast<std::size_t>(nc));
  std::copy(profile.begin(), profile.end(), real);
  std::fill(real + n_r_, real + n_pad_, 0.0);
  fftw_execute_dft_r2c(plans_->forward, real, spec);
  for (int k = 0; k < nc; ++k) {
    spec[k][0] *= response_[static_cast<std::size_t>(k)];
    spec[k][1] *= response_[static_cast<std::size_t>(k)];
  }
  fftw_execute_dft_c2r(plans_->backward, spec, real);
  const double inv = 1.0 / n_pad_;
  for (int i = 0; i < n_r_; ++i) profile[static_cast<std::size_t>(i)] = real[i] * inv;
  fftw_free(real);
  fftw_free(spec);
}

SinogramSlab extract_slab(const SinogramStack& stack, int slab) {
  const auto& spec = stack.spec();
  if (slab < 0 || slab >= stack.n_slabs()) throw InvalidArgument("extract_slab: slab out of range");
  SinogramSlab out(spec.n_r, spec.r_min, spec.dr, spec.n_theta);
  for (int ir = 0; ir < spec.n_r; ++ir) {
    for (int it = 0; it < spec.n_theta; ++it) {
      const std::size_t b = stack.bin(slab, ir, it);
      const std::size_t k = static_cast<std::size_t>(ir) * static_cast<std::size_t>(spec.n_theta) + static_cast<std::size_t>(it);
      if (stack.count(b) > 0) {
        out.values[k] = stack.mean(b);
        out.populated[k] = 1;
      }
    }
  }
  return out;
}

void inpaint_angular(SinogramSlab& slab) {
  const int nt = slab.n_theta;
  std::vector<double> filled(static_cast<std::size_t>(nt));
  for (int ir = 0; ir < slab.n_r; ++ir) {
    const std::size_t row = static_cast<std::size_t>(ir) * static_cast<std::size_t>(nt);
    bool any = false;
    for (int it = 0; it < nt; ++it) any = any || slab.populated[row + static_cast<std::size_t>(it)];
    if (!any) continue;
    for (int it = 0; it < nt; ++it) {
      const std::size_t k = row + static_cast<std::size_t>(it);
      filled[static_cast<std::size_t>(it)] = slab.values[k];
      if (slab.populated[k]) continue;
      int lo = it - 1;
      while (lo >= 0 && !slab.populated[row + static_cast<std::size_t>(lo)]) --lo;
      int hi = it + 1;
      while (hi < nt && !slab.populated[row + static_cast<std::size_t>(hi)]) ++hi;
      if (lo >= 0 && hi < nt) {
        const double w = static_cast<double>(it - lo) / (hi - lo);
        filled[static_cast<std::size_t>(it)] = (1.0 - w) * slab.values[row + static_cast<std::size_t>(lo)] +
                                               w * slab.values[row + static_cast<std::size_t>(hi)];
      } else if (lo >= 0) {
        filled[static_cast<std::size_t>(it)] = slab.values[row + static_cast<std::size_t>(lo)];
      } else {
        filled[static_cast<std::size_t>(it)] = slab.values[row + static_cast<std::size_t>(hi)];
      }
    }
    std::copy(filled.begin(), filled.end(), slab.values.begin() + static_cast<std::ptrdiff_t>(row));
  }
}

SliceImage fbp_slice(const SinogramSlab& slab, const GridSpec& grid, int slab_index) {
  const RampFilter filter(slab.n_r);
  return fbp_slice(slab, grid, slab_index, filter);
}

SliceImage fbp_slice(const SinogramSlab& slab, const GridSpec& grid, int slab_index, const RampFilter& filter) {
  SliceImage img;
  img.slab = slab_index;
  img.n_y = grid.dims[1];
  img.n_z = grid.dims[2];
  img.pixels.assign(static_cast<std::size_t>(img.n_y) * static_cast<std::size_t>(img.n_z), 0.0);

  const int nr = slab.n_r;
  const int nt = slab.n_theta;
  std::vector<int> columns;
  for (int it = 0; it < nt; ++it) {
    for (int ir = 0; ir < nr; ++ir) {
      if (slab.populated[static_cast<std::size_t>(ir) * static_cast<std::size_t>(nt) + static_cast<std::size_t>(it)]) {
        columns.push_back(it);
        break;
      }
    }
  }
  if (columns.empty()) {
    img.empty = true;
    return img;
  }

  const double dtheta = std::numbers::pi / nt;
  std::vector<double> profile(static_cast<std::size_t>(nr));
  for (int it : columns) {
    for (int ir = 0; ir < nr; ++ir) {
      profile[static_cast<std::size_t>(ir)] =
          slab.values[static_cast<std::size_t>(ir) * static_cast<std::size_t>(nt) + static_cast<std::size_t>(it)];
    }
    filter.apply(profile);
    const double theta = (it + 0.5) * dtheta;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    for (int iy = 0; iy < img.n_y; ++iy) {
      const double y = grid.origin.y + (iy + 0.5) * grid.voxel;
      for (int iz = 0; iz < img.n_z; ++iz) {
        const double z = grid.origin.z + (iz + 0.5) * grid.voxel;
        const double u = (y * c + z * s - slab.r_min) / slab.dr - 0.5;
        const double f = std::floor(u);
        const int i0 = static_cast<int>(f);
        const double w = u - f;
        double v = 0.0;
        if (i0 >= 0 && i0 < nr) v += (1.0 - w) * profile[static_cast<std::size_t>(i0)];
        if (i0 + 1 >= 0 && i0 + 1 < nr) v += w * profile[static_cast<std::size_t>(i0 + 1)];
        img.pixels[static_cast<std::size_t>(iy) * static_cast<std::size_t>(img.n_z) + static_cast<std::size_t>(iz)] += v;
      }
    }
  }
  const double scale = std::numbers::pi / (2.0 * static_cast<double>(columns.size()) * slab.dr);
  for (auto& p : img.pixels) p *= scale;
  return img;
}

FbpResult reconstruct_fbp(const SinogramStack& stack, unsigned workers) {
  const GridSpec& grid = stack.grid();
  const int n_slabs = stack.n_slabs();
  const RampFilter filter(stack.spec().n_r);
  std::vector<SliceImage> slices(static_cast<std::size_t>(n_slabs));
  parallel_for(static_cast<std::size_t>(n_slabs), workers, [&](std::size_t s, unsigned) {
    SinogramSlab slab = extract_slab(stack, static_cast<int>(s));
    if (stack.spec().inpaint) inpaint_angular(slab);
    slices[s] = fbp_slice(slab, grid, static_cast<int>(s), filter);
  });

  FbpResult out;
  out.volume = ImageVolume(grid);
  for (int ix = 0; ix < n_slabs; ++ix) {
    const SliceImage& img = slices[static_cast<std::size_t>(ix)];
    if (img.empty) {
      out.empty_slabs.push_back(ix);
      continue;
    }
    for (int iy = 0; iy < img.n_y; ++iy) {
      for (int iz = 0; iz < img.n_z; ++iz) {
        const std::size_t v = grid.index(ix, iy, iz);
        out.volume.values[v] =
            img.pixels[static_cast<std::size_t>(iy) * static_cast<std::size_t>(img.n_z) + static_cast<std::size_t>(iz)];
        out.volume.valid[v] = 1;
      }
    }
  }
  if (out.volume.valid_count() == 0) throw EmptyRegionError("reconstruct_fbp: every slab is empty");
  out.normalization = value_range(out.volume);
  return out;
}

FbpReconstruction reconstruct_fbp(std::span<const EventDataset> datasets, const GridSpec& grid,
                                  const SinogramSpec& spec, unsigned workers) {
  SinogramStack stack = accumulate_sinogram(datasets, grid, spec, workers);
  FbpResult image = reconstruct_fbp(stack, workers);
  return {std::move(stack), std::move(image)};
}

}  // namespace mutomo
