#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mutomo/error.hpp"
#include "mutomo/metrics.hpp"

using namespace mutomo;

namespace {

GridSpec small_grid() {
  GridSpec g;
  g.dims = {4, 5, 6};
  g.origin = {0, 0, 0};
  return g;
}

ImageVolume random_volume(std::uint64_t seed) {
  ImageVolume v(small_grid());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 0.1);
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    v.values[i] = u(rng);
    v.valid[i] = 1;
  }
  return v;
}

VoxelMask random_mask(const GridSpec& g, std::uint64_t seed, double p = 0.4) {
  VoxelMask m(g);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution b(p);
  for (auto& x : m.on) x = b(rng);
  return m;
}

}  // namespace

TEST_CASE("region statistics examples") {
  ImageVolume v(small_grid());
  VoxelMask m(v.grid);
  for (std::size_t i = 0; i < 10; ++i) {
    v.values[i] = 5.0;
    v.valid[i] = 1;
    m.on[i] = 1;
  }
  RegionStats s = region_stats(v, m);
  CHECK(s.mean == 5.0);
  CHECK(s.stddev == 0.0);
  CHECK(s.count == 10);

  for (std::size_t i = 0; i < 10; ++i) v.values[i] = static_cast<double>(i % 2);
  s = region_stats(v, m);
  CHECK(s.mean == doctest::Approx(0.5));
  CHECK(s.stddev == doctest::Approx(0.5));
}

TEST_CASE("region statistics against a two-pass oracle") {
  const ImageVolume v = random_volume(1);
  const VoxelMask m = random_mask(v.grid, 2);
  double sum = 0;
  int n = 0;
  for (std::size_t i = 0; i < m.on.size(); ++i) {
    if (m.on[i]) {
      sum += v.values[i];
      ++n;
    }
  }
  const double mean = sum / n;
  double ss = 0;
  for (std::size_t i = 0; i < m.on.size(); ++i) {
    if (m.on[i]) ss += (v.values[i] - mean) * (v.values[i] - mean);
  }
  const RegionStats s = region_stats(v, m);
  CHECK(std::abs(s.mean - mean) < 1e-12);
  CHECK(std::abs(s.stddev - std::sqrt(ss / n)) < 1e-12);
  CHECK(s.count == static_cast<std::size_t>(n));
}

TEST_CASE("pooled statistics of disjoint masks") {
  const ImageVolume v = random_volume(3);
  const VoxelMask a = random_mask(v.grid, 4);
  VoxelMask b(v.grid), both(v.grid);
  for (std::size_t i = 0; i < a.on.size(); ++i) {
    b.on[i] = !a.on[i] && (i % 3 != 0);
    both.on[i] = a.on[i] || b.on[i];
  }
  const RegionStats p = pool(region_stats(v, a), region_stats(v, b));
  const RegionStats d = region_stats(v, both);
  CHECK(std::abs(p.mean - d.mean) < 1e-12);
  CHECK(std::abs(p.stddev - d.stddev) < 1e-12);
  CHECK(p.count == d.count);
}

TEST_CASE("region statistics errors") {
  ImageVolume v = random_volume(5);
  CHECK_THROWS_AS(region_stats(v, VoxelMask(v.grid)), EmptyRegionError);
  VoxelMask m(v.grid);
  m.on[v.grid.index(1, 2, 3)] = 1;
  v.valid[v.grid.index(1, 2, 3)] = 0;
  try {
    region_stats(v, m);
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("(1, 2, 3)") != std::string::npos);
  }
}

TEST_CASE("contrast-to-noise ratio") {
  CHECK(cnr({2.0, 0.0, 1}, {1.0, 0.5, 1}) == doctest::Approx(2.0));
  CHECK(cnr({0.0, 0.0, 1}, {1.0, 0.5, 1}) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(cnr({2.0, 0.1, 1}, {1.0, 0.0, 1}), InvalidArgument);

  // Rounded inputs reproduce the two-decimal ratios.
  const double dof = cnr({0.0548, 0.0, 1}, {0.0445, 0.0024, 1});
  const double bp = cnr({0.0815, 0.0, 1}, {0.0723, 0.0028, 1});
  CHECK(std::round(dof * 100) / 100 == 4.29);
  CHECK(std::round(bp * 100) / 100 == 3.29);
  CHECK(dof == doctest::Approx(0.0103 / 0.0024).epsilon(1e-12));
}

TEST_CASE("cnr is invariant under positive affine rescaling") {
  const ImageVolume v = random_volume(6);
  const VoxelMask fg = random_mask(v.grid, 7), bg = random_mask(v.grid, 8);
  const double base = cnr(region_stats(v, fg), region_stats(v, bg));
  for (const auto& [a, b] : {std::pair{2.0, 0.0}, std::pair{3.7, -1.2}, std::pair{0.01, 5.0}}) {
    ImageVolume w = v;
    for (auto& x : w.values) x = a * x + b;
    CHECK(cnr(region_stats(w, fg), region_stats(w, bg)) == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("unit normalization") {
  const auto n = normalize_unit(std::vector<double>{2, 4, 6});
  CHECK(n == std::vector<double>{0.0, 0.5, 1.0});
  const auto table = normalize_unit(std::vector<ValueWithError>{{0.0383, 0.001}, {0.0548, 0.002}, {0.0445, 0.0024}});
  CHECK(table[0].value == 0.0);
  CHECK(table[1].value == 1.0);
  CHECK(table[2].value == doctest::Approx(0.376).epsilon(0.001));
  CHECK(table[2].error == doctest::Approx(0.0024 / 0.0165).epsilon(1e-9));
  std::vector<ValueWithError> again = normalize_unit(table);
  for (std::size_t i = 0; i < table.size(); ++i) {
    CHECK(again[i].value == doctest::Approx(table[i].value).epsilon(1e-15));
    CHECK(again[i].error == doctest::Approx(table[i].error).epsilon(1e-15));
  }
  CHECK_THROWS_AS(normalize_unit(std::vector<double>{3, 3, 3}), InvalidArgument);
  CHECK_THROWS_AS(normalize_unit(std::vector<double>{}), InvalidArgument);
}

TEST_CASE("edge rise examples") {
  std::vector<double> ramp;
  for (int i = 0; i <= 10; ++i) ramp.push_back(i / 10.0);
  const EdgeRise r = edge_rise(ramp, 0.0, 1.0);
  CHECK(r.distance == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(r.low_crossing == doctest::Approx(1.0));
  CHECK(r.high_crossing == doctest::Approx(9.0));

  const std::vector<double> step{0, 0, 0, 0, 1, 1, 1};
  CHECK(edge_rise(step, 0.0, 1.0).distance <= 1.0);
}

TEST_CASE("edge rise invariance") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0, 0.02);
  std::vector<double> p;
  for (int i = 0; i < 20; ++i) p.push_back(1.0 / (1.0 + std::exp(-(i - 9.5) / 1.5)) + g(rng));
  const double base = edge_rise(p, 0.0, 1.0).distance;

  std::vector<double> rev(p.rbegin(), p.rend());
  CHECK(edge_rise(rev, 0.0, 1.0).distance == doctest::Approx(base).epsilon(1e-12));

  std::vector<double> aff;
  for (double x : p) aff.push_back(0.03 * x + 0.04);
  CHECK(edge_rise(aff, 0.04, 0.07).distance == doctest::Approx(base).epsilon(1e-9));

  // A falling profile referenced the other way round measures the same edge.
  std::vector<double> inv;
  for (double x : p) inv.push_back(1.0 - x);
  CHECK(edge_rise(inv, 1.0, 0.0).distance == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("edge rise errors name the missing level") {
  try {
    edge_rise({0.0, 0.05, 0.02}, 0.0, 1.0);
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("10%") != std::string::npos);
  }
  try {
    edge_rise({0.0, 0.5, 0.6}, 0.0, 1.0);
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("90%") != std::string::npos);
  }
  CHECK_THROWS_AS(edge_rise({0.0}, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(edge_rise({0.0, 1.0}, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("threshold masks") {
  ImageVolume v = random_volume(10);
  v.valid[0] = 0;
  CHECK(threshold_voxels(v, 0.0).count() == v.valid_count());
  CHECK(threshold_voxels(v, std::numeric_limits<double>::infinity()).empty());
  for (double t1 = 0.0; t1 < 0.1; t1 += 0.01) {
    CHECK(is_subset(threshold_voxels(v, t1 + 0.013), threshold_voxels(v, t1)));
  }
}

TEST_CASE("connected components and overlap") {
  GridSpec g = small_grid();
  VoxelMask m(g);
  // A 3-voxel bar, a lone voxel, and a diagonal neighbor that is not 6-connected.
  m.on[g.index(0, 0, 0)] = m.on[g.index(0, 0, 1)] = m.on[g.index(0, 0, 2)] = 1;
  m.on[g.index(3, 4, 5)] = 1;
  m.on[g.index(2, 3, 4)] = 1;
  const auto comps = connected_components(m);
  REQUIRE(comps.size() == 3);
  CHECK(comps[0].size() == 3);
  CHECK(comps[1].size() == 1);
  CHECK(comps[1][0] == g.index(2, 3, 4));
  VoxelMask region(g);
  region.on[g.index(0, 0, 1)] = 1;
  CHECK(overlap_fraction(comps[0], region) == doctest::Approx(1.0 / 3.0));
  CHECK(overlap_fraction({}, region) == 0.0);
}

TEST_CASE("profiles and quantiles") {
  ImageVolume v(small_grid());
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    v.values[i] = static_cast<double>(i);
    v.valid[i] = 1;
  }
  const auto p = extract_profile(v, 2, {1, 2, 0}, 5);
  REQUIRE(p.size() == 6);
  CHECK(p[3] == v.at(1, 2, 3));
  const auto back = extract_profile(v, 2, {1, 2, 5}, 0);
  CHECK(back.front() == v.at(1, 2, 5));
  CHECK(back.back() == v.at(1, 2, 0));
  v.valid[v.grid.index(1, 2, 2)] = 0;
  CHECK_THROWS_AS(extract_profile(v, 2, {1, 2, 0}, 5), InvalidArgument);
  CHECK_THROWS_AS(extract_profile(v, 1, {1, 2, 0}, 9), InvalidArgument);

  // Slab 0 holds values 0..29.
  CHECK(slab_quantile(v, 0, 0.5) == 14.0);
  CHECK(slab_quantile(v, 0, 1.0) == 29.0);
  CHECK(slab_quantile(v, 0, 0.0) == 0.0);
}
