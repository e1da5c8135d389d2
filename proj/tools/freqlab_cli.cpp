// Command-line front end: frequency sweeps, capacity sweeps, iteration-matched
// pairs, dataset census, and offline plotting.

#include <cstdio>
#include <filesystem>
#include <thread>

#include <CLI11.hpp>

#include "freqlab/experiment.hpp"

namespace fs = std::filesystem;
using namespace freqlab;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  std::string profile = "desk";
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON experiment config");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--threads", args.threads, "worker threads");
  cmd->add_option("--profile", args.profile, "base profile: desk|full")
      ->check(CLI::IsMember({"desk", "full"}));
  cmd->add_flag("--timing", args.timing,
                "record wall times (breaks byte-determinism of raw.csv)");
}

ExperimentConfig resolve_config(const CommonArgs& args, Mode mode) {
  ExperimentConfig base =
      args.profile == "full" ? full_profile() : desk_profile();
  ExperimentConfig config =
      args.config_path.empty() ? base : load_config(args.config_path, base);
  config.mode = mode;
  if (!args.out_dir.empty()) config.output_dir = args.out_dir;
  config.timing = args.timing;
  config.validate();
  fs::create_directories(config.output_dir);
  return config;
}

std::string join(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frequency-sweep laboratory for toy trajectory prediction"};
  app.require_subcommand(1);

  CommonArgs args;
  auto* sweep = app.add_subcommand("sweep", "frequency sweep at fixed widths");
  auto* capacity =
      app.add_subcommand("capacity-sweep", "sweep per width, report f* vs W");
  auto* pair =
      app.add_subcommand("matched-pair", "iteration-matched frequency pair");
  auto* census =
      app.add_subcommand("census", "per-frequency training sample counts");
  auto* plot = app.add_subcommand("plot", "render response.svg from a CSV");
  for (auto* cmd : {sweep, capacity, pair, census, plot})
    add_common(cmd, args);

  std::string plot_input;
  plot->add_option("--aggregate", plot_input,
                   "aggregate.csv to plot (defaults to <out>/aggregate.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) {
      const ExperimentConfig config = resolve_config(args, Mode::sweep);
      const ResultsTable table = run_sweep(config, args.threads);
      write_raw_csv(table, join(config.output_dir, "raw.csv"));
      write_aggregate_csv(table, join(config.output_dir, "aggregate.csv"));
      emit_response_plot(table, join(config.output_dir, "response.svg"));
      write_manifest_json(config, join(config.output_dir, "manifest.json"));
      std::printf("sweep done: %zu runs -> %s\n", table.raw.size(),
                  config.output_dir.c_str());
    } else if (capacity->parsed()) {
      const ExperimentConfig config =
          resolve_config(args, Mode::capacity_sweep);
      const CapacityResult result = run_capacity_sweep(config, args.threads);
      write_raw_csv(result.table, join(config.output_dir, "raw.csv"));
      write_aggregate_csv(result.table,
                          join(config.output_dir, "aggregate.csv"));
      write_fstar_csv(result.f_star_per_width,
                      join(config.output_dir, "fstar.csv"));
      emit_response_plot(result.table,
                         join(config.output_dir, "response.svg"));
      emit_fstar_plot(result.f_star_per_width,
                      join(config.output_dir, "fstar.svg"));
      write_manifest_json(config, join(config.output_dir, "manifest.json"));
      for (const auto& [w, f] : result.f_star_per_width)
        std::printf("W=%d  f*=%g Hz\n", w, f);
    } else if (pair->parsed()) {
      const ExperimentConfig config = resolve_config(args, Mode::matched_pair);
      const MatchedPairRow row = run_matched_pair_experiment(config);
      write_matched_pair_csv(row, join(config.output_dir, "matched_pair.csv"));
      write_manifest_json(config, join(config.output_dir, "manifest.json"));
      std::printf("%g Hz x %d ep: ADE %.3f | %g Hz x %d ep: ADE %.3f | %s\n",
                  row.f_low, row.epochs_low, row.ade_low, row.f_high,
                  row.epochs_high, row.ade_high,
                  format_signed_pct(row.delta_ade_pct).c_str());
    } else if (census->parsed()) {
      const ExperimentConfig config = resolve_config(args, Mode::sweep);
      const SceneSet scenes = generate_scene_set(config.world, Role::train);
      const auto counts = dataset_census(config.grid, scenes, config.sample);
      write_census_csv(counts, join(config.output_dir, "census.csv"));
      for (const auto& [f, n] : counts)
        std::printf("%g Hz: %zu samples\n", f, n);
    } else if (plot->parsed()) {
      const ExperimentConfig config = resolve_config(args, Mode::sweep);
      const std::string input = plot_input.empty()
                                    ? join(config.output_dir, "aggregate.csv")
                                    : plot_input;
      const ResultsTable table = read_aggregate_csv(input);
      emit_response_plot(table, join(config.output_dir, "response.svg"));
      std::printf("wrote %s\n",
                  join(config.output_dir, "response.svg").c_str());
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 2;
  }
  return 0;
}
