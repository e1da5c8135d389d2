#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "freqlab/raster.hpp"
#include "freqlab/sample_spec.hpp"
#include "freqlab/world.hpp"

namespace freqlab {

struct FrequencyGrid {
  std::vector<double> frequencies;  // strictly increasing, Hz

  double max() const;
  void validate() const;
};

struct AnchorSet {
  std::string scene_id;
  double frequency = 0.0;
  std::vector<double> anchors;  // strictly increasing, subset of native stamps
};

struct TrainingSample {
  std::string scene_id;
  double anchor_t = 0.0;
  Tensor bev;                   // stacked frames, (F * 3, size, size)
  std::vector<double> history;  // flattened EgoHistory rows
  Command command = Command::straight;
  Waypoints target;
};

struct FrequencyDataset {
  double frequency = 0.0;
  std::vector<TrainingSample> samples;
  Role role = Role::train;
};

// Greedy accumulated-phase selection: anchor j is the native timestamp nearest
// to first + j / f, deduplicated, always starting at the first native stamp.
AnchorSet sample_timestamps(const std::vector<double>& native, double f);

// Keeps anchors whose history window, future horizon, and every BEV frame
// offset lie inside the scene span (closed intervals, 1e-9 s tolerance).
AnchorSet filter_valid_anchors(const AnchorSet& anchorset, const Scene& scene,
                               const SampleSpec& spec);

// Materializes every valid anchor of every scene into a TrainingSample,
// ordered by (scene_id, anchor_t). Per-sample noise streams are keyed by
// (noise_seed, scene_id, anchor_t), so a sample's bytes do not depend on f.
FrequencyDataset build_training_set(const SceneSet& scenes, double f,
                                    const SampleSpec& spec,
                                    const RenderConfig& render,
                                    const NoiseConfig& noise,
                                    std::uint64_t noise_seed);

// The shared validation set: anchors at max(grid), used to evaluate every
// training frequency.
FrequencyDataset build_validation_set(const SceneSet& scenes,
                                      const FrequencyGrid& grid,
                                      const SampleSpec& spec,
                                      const RenderConfig& render,
                                      const NoiseConfig& noise,
                                      std::uint64_t noise_seed);

std::vector<std::pair<double, std::size_t>> dataset_census(
    const FrequencyGrid& grid, const SceneSet& scenes, const SampleSpec& spec);

// Canonical byte serialization of one sample, used for the window-fixedness
// checks and for debugging.
std::vector<std::uint8_t> serialize_sample(const TrainingSample& sample);

}  // namespace freqlab
