#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "freqlab/evaluator.hpp"
#include "freqlab/raster.hpp"
#include "freqlab/subsample.hpp"
#include "freqlab/trainer.hpp"
#include "freqlab/world.hpp"

namespace freqlab {

enum class Mode { sweep, capacity_sweep, matched_pair };
const char* mode_name(Mode m);

struct MatchedPairSpec {
  double f_low = 6.0;
  double f_high = 10.0;
  int epochs_high = 3;
};

struct ExperimentConfig {
  WorldConfig world;       // training scenes
  int num_val_scenes = 10; // validation scenes share world parameters
  RenderConfig render;
  NoiseConfig noise;
  SampleSpec sample;
  FrequencyGrid grid;
  std::vector<int> widths = {16};
  std::vector<std::uint64_t> seeds = {42, 43, 44};
  TrainConfig train;
  Mode mode = Mode::sweep;
  std::string output_dir = "out";
  MatchedPairSpec pair;
  // Wall times are written as 0 unless enabled, keeping output files a pure
  // function of (config, seeds).
  bool timing = false;

  void validate() const;
  ModelConfig model_config(int width) const;
};

// Reference configurations. "desk" is sized for CPU-budget runs; "full"
// mirrors the larger toy setup (2,4,6,7,8,9,10 Hz grid, widths 16/48/64).
ExperimentConfig desk_profile();
ExperimentConfig full_profile();

// Reads a JSON config file; keys present override the profile defaults.
ExperimentConfig load_config(const std::string& path,
                             const ExperimentConfig& base);

struct RawRow {
  std::string mode;
  double frequency = 0.0;
  int width = 0;
  std::uint64_t seed = 0;
  int epochs = 0;
  std::int64_t total_steps = 0;
  double ade = 0.0;
  double fde = 0.0;
  double wall_time = 0.0;
  bool excluded = false;  // set when the run diverged
};

struct AggRow {
  double frequency = 0.0;
  int width = 0;
  double ade_mean = 0.0, ade_std = 0.0;
  double fde_mean = 0.0, fde_std = 0.0;
  bool f_star = false;
};

struct ResultsTable {
  std::vector<RawRow> raw;
  std::vector<AggRow> aggregate;

  FrequencyResponse response_for_width(int width) const;
};

ResultsTable run_sweep(const ExperimentConfig& config, int threads);

struct CapacityResult {
  ResultsTable table;
  std::vector<std::pair<int, double>> f_star_per_width;  // (W, f*)
};
CapacityResult run_capacity_sweep(const ExperimentConfig& config, int threads);

struct MatchedPairRow {
  double f_low = 0.0, f_high = 0.0;
  int epochs_low = 0, epochs_high = 0;
  double ade_low = 0.0, fde_low = 0.0;
  double ade_high = 0.0, fde_high = 0.0;
  double delta_ade_pct = 0.0;
};
MatchedPairRow run_matched_pair_experiment(const ExperimentConfig& config);

// Output writers. All output is deterministic for a fixed config.
void write_raw_csv(const ResultsTable& table, const std::string& path);
void write_aggregate_csv(const ResultsTable& table, const std::string& path);
void write_census_csv(
    const std::vector<std::pair<double, std::size_t>>& census,
    const std::string& path);
void write_matched_pair_csv(const MatchedPairRow& row, const std::string& path);
void write_fstar_csv(const std::vector<std::pair<int, double>>& f_star,
                     const std::string& path);
void write_manifest_json(const ExperimentConfig& config,
                         const std::string& path);
std::string format_signed_pct(double pct);  // e.g. "-12.05%"

// Frequency-response chart: one polyline per width, error bars = std,
// best frequency circled.
void emit_response_plot(const ResultsTable& table, const std::string& path);
// f* vs W chart.
void emit_fstar_plot(const std::vector<std::pair<int, double>>& f_star,
                     const std::string& path);

// Reads an aggregate.csv back into a table (plot verb, offline checks).
ResultsTable read_aggregate_csv(const std::string& path);

}  // namespace freqlab
