#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "specdens/experiment.hpp"

namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= s.size()) {
    size_t comma = s.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::vector<long> parse_sizes(const std::string& s) {
  std::vector<long> out;
  for (const auto& piece : split_commas(s)) {
    size_t used = 0;
    long v = std::stol(piece, &used);
    if (used != piece.size())
      throw std::invalid_argument("--stages: '" + piece + "' is not an integer");
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "standard and delocalized spectral density functions of group ring "
      "matrices: finite approximation stages, kernel Fourier coefficients, "
      "determinant bounds and a torus symbol oracle"};
  app.require_subcommand(1);

  std::string config_path, out_dir, stages_arg, track_arg;
  long grid = -1;
  bool reproducible = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration document (JSON)")
        ->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--stages", stages_arg,
                    "comma separated stage sizes (overrides the config)");
    sub->add_option("--track", track_arg,
                    "comma separated tracked words (overrides the config)");
    sub->add_option("--grid", grid, "oracle grid size (overrides the config)");
    sub->add_flag("--reproducible", reproducible,
                  "sequential stages, single threaded solver, stable bytes");
  };
  add_common(app.add_subcommand(
      "density", "step density functions per stage (densities.csv)"));
  add_common(app.add_subcommand(
      "converge", "kernel Fourier coefficients across stages (convergence.csv)"));
  add_common(app.add_subcommand(
      "detbound", "log determinants against their lower bounds (determinants.csv)"));
  add_common(app.add_subcommand(
      "sofic", "normalized determinants over sofic stages with integer "
               "certificates (determinants.csv)"));
  add_common(app.add_subcommand(
      "oracle", "torus symbol quadrature for the limit operator"));

  CLI11_PARSE(app, argc, argv);
  const std::string mode = app.get_subcommands().front()->get_name();

  try {
    specdens::ExperimentConfig cfg = specdens::ExperimentConfig::from_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (grid >= 0) cfg.grid = grid;
    if (reproducible) cfg.reproducible = true;
    if (!stages_arg.empty()) cfg.set_stages(parse_sizes(stages_arg));
    if (!track_arg.empty()) cfg.set_track(split_commas(track_arg));
    specdens::ExperimentResult res = specdens::run_experiment(cfg, mode);
    specdens::write_experiment_outputs(res, cfg.out_dir);
    std::fputs(res.report_text.c_str(), stdout);
    return res.ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
