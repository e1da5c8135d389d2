#pragma once

#include <map>
#include <vector>

#include "freqlab/model.hpp"
#include "freqlab/subsample.hpp"

namespace freqlab {

struct MetricResult {
  double ade = 0.0;  // meters, mean per-waypoint Euclidean distance
  double fde = 0.0;  // meters, last-waypoint Euclidean distance
  std::size_t sample_count = 0;
};

double ade(const Waypoints& pred, const Waypoints& gt);
double fde(const Waypoints& pred, const Waypoints& gt);

MetricResult evaluate(const ToyPredictor& model, const FrequencyDataset& valset);

// Mean and population standard deviation over per-seed results.
struct SeedAggregate {
  double ade_mean = 0.0, ade_std = 0.0;
  double fde_mean = 0.0, fde_std = 0.0;
};
SeedAggregate aggregate_seeds(const std::vector<MetricResult>& results);

struct FrequencyEntry {
  double ade_mean = 0.0, ade_std = 0.0;
  double fde_mean = 0.0, fde_std = 0.0;
  std::vector<double> ade_seeds, fde_seeds;
};

struct FrequencyResponse {
  std::map<double, FrequencyEntry> entries;  // keyed by frequency, Hz
};

struct BestFrequency {
  double f_star = 0.0;
};

// Argmin of ade_mean; ties break to the lowest frequency.
BestFrequency best_frequency(const FrequencyResponse& response);

}  // namespace freqlab
