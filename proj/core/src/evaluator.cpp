#include "freqlab/evaluator.hpp"

#include <cmath>
#include <tuple>
#include <utility>

namespace freqlab {

double ade(const Waypoints& pred, const Waypoints& gt) {
  if (pred.points.size() != gt.points.size())
    throw ShapeError("ade: waypoint count mismatch");
  if (pred.points.empty()) throw EmptyInputError("ade: no waypoints");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.points.size(); ++i)
    acc += std::hypot(pred.points[i][0] - gt.points[i][0],
                      pred.points[i][1] - gt.points[i][1]);
  return acc / static_cast<double>(pred.points.size());
}

double fde(const Waypoints& pred, const Waypoints& gt) {
  if (pred.points.size() != gt.points.size())
    throw ShapeError("fde: waypoint count mismatch");
  if (pred.points.empty()) throw EmptyInputError("fde: no waypoints");
  return std::hypot(pred.points.back()[0] - gt.points.back()[0],
                    pred.points.back()[1] - gt.points.back()[1]);
}

MetricResult evaluate(const ToyPredictor& model,
                      const FrequencyDataset& valset) {
  if (valset.role != Role::validation)
    throw UsageError("evaluate: dataset role must be validation");
  if (valset.samples.empty()) throw EmptyInputError("evaluate: empty set");
  MetricResult result;
  // Fixed summation order keeps evaluation bit-deterministic.
  for (const TrainingSample& sample : valset.samples) {
    const Waypoints pred = model.predict_waypoints(sample);
    result.ade += ade(pred, sample.target);
    result.fde += fde(pred, sample.target);
  }
  result.sample_count = valset.samples.size();
  result.ade /= static_cast<double>(result.sample_count);
  result.fde /= static_cast<double>(result.sample_count);
  return result;
}

namespace {

std::pair<double, double> mean_pop_std(const std::vector<double>& values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {mean, std::sqrt(var)};
}

}  // namespace

SeedAggregate aggregate_seeds(const std::vector<MetricResult>& results) {
  if (results.empty()) throw EmptyInputError("aggregate_seeds: no results");
  std::vector<double> ades, fdes;
  for (const auto& r : results) {
    ades.push_back(r.ade);
    fdes.push_back(r.fde);
  }
  SeedAggregate agg;
  std::tie(agg.ade_mean, agg.ade_std) = mean_pop_std(ades);
  std::tie(agg.fde_mean, agg.fde_std) = mean_pop_std(fdes);
  return agg;
}

BestFrequency best_frequency(const FrequencyResponse& response) {
  if (response.entries.empty())
    throw EmptyInputError("best_frequency: empty response");
  double best_f = response.entries.begin()->first;
  double best_ade = response.entries.begin()->second.ade_mean;
  // Map iteration is ascending in f, so strict < keeps the lowest on ties.
  for (const auto& [f, entry] : response.entries) {
    if (entry.ade_mean < best_ade) {
      best_ade = entry.ade_mean;
      best_f = f;
    }
  }
  return {best_f};
}

}  // namespace freqlab
