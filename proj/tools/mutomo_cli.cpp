#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "mutomo/config.hpp"
#include "mutomo/pipeline.hpp"
#include "mutomo/volume.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Pipeline configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed (overrides the config)");
  cmd->add_option("--workers", o.workers, "Worker threads; results do not depend on it")->check(CLI::Range(1u, 1024u));
  cmd->add_option("--out", o.out, "Output directory (overrides the config)");
}

mutomo::PipelineConfig resolve(const CommonOptions& o) {
  mutomo::PipelineConfig c = o.config.empty() ? mutomo::PipelineConfig{} : mutomo::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (!o.out.empty()) c.output_dir = o.out;
  c.workers = o.workers;
  mutomo::validate(c);
  return c;
}

int axis_of(const std::string& a) {
  if (a == "x") return 0;
  if (a == "y") return 1;
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Muon scattering tomography workbench"};
  app.require_subcommand(1);

  CommonOptions opt;
  auto* sim = app.add_subcommand("simulate", "Simulate the campaign and write event files");
  auto* dof = app.add_subcommand("recon-dof", "Depth-of-field reconstruction from event files");
  auto* fbp = app.add_subcommand("recon-fbp", "Sinogram and filtered-backprojection reconstruction");
  auto* met = app.add_subcommand("metrics", "Region statistics, CNR and edge rise");
  auto* slc = app.add_subcommand("slice", "Export PGM slice images");
  auto* swp = app.add_subcommand("sweep", "Metrics over view-count and muon-count subsets");
  auto* run = app.add_subcommand("run", "Full pipeline");
  for (auto* cmd : {sim, dof, fbp, met, slc, swp, run}) add_common(cmd, opt);

  std::string volume;
  std::string axis = "x";
  int index = -1;
  std::string output;
  slc->add_option("--volume", volume, "Voxel file to slice (default: configured slices of both reconstructions)")
      ->check(CLI::ExistingFile);
  slc->add_option("--axis", axis, "Slice axis")->check(CLI::IsMember({"x", "y", "z"}));
  slc->add_option("--index", index, "Slice index along the axis");
  slc->add_option("--output", output, "PGM file to write");

  CLI11_PARSE(app, argc, argv);

  try {
    if (slc->parsed() && !volume.empty()) {
      if (index < 0 || output.empty()) throw mutomo::InvalidArgument("slice --volume needs --index and --output");
      const auto vol = mutomo::from_voxel_file(mutomo::read_voxel_file(volume));
      mutomo::write_pgm(output, mutomo::export_slice_image(vol, axis_of(axis), index));
      return 0;
    }

    const mutomo::PipelineConfig c = resolve(opt);
    auto stage = [&](const std::string& name, const std::function<void()>& body) {
      mutomo::run_stage(c, name, body);
      mutomo::write_manifest(c.output_dir, "complete: " + name);
    };
    if (sim->parsed()) stage("simulate", [&] { mutomo::simulate(c); });
    if (dof->parsed()) stage("recon-dof", [&] { mutomo::recon_dof(c); });
    if (fbp->parsed()) stage("recon-fbp", [&] { mutomo::recon_fbp(c); });
    if (met->parsed()) stage("metrics", [&] { mutomo::metrics(c); });
    if (slc->parsed()) stage("slice", [&] { mutomo::export_slices(c); });
    if (swp->parsed()) stage("sweep", [&] { mutomo::sweep(c); });
    if (run->parsed()) mutomo::run_pipeline(c);
  } catch (const mutomo::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
