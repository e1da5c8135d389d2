#include "freqlab/subsample.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "freqlab/rng.hpp"

namespace freqlab {

namespace {

constexpr double kTimeTol = 1e-9;

std::uint64_t sample_stream_seed(std::uint64_t noise_seed,
                                 const std::string& scene_id, double anchor_t) {
  const auto tick = static_cast<std::uint64_t>(std::llround(anchor_t * 1e9));
  return Rng::derive(noise_seed, {Rng::hash_string(scene_id), tick});
}

TrainingSample materialize(const Scene& scene, double anchor_t,
                           const SampleSpec& spec, const RenderConfig& render,
                           const NoiseConfig& noise,
                           std::uint64_t noise_seed) {
  TrainingSample sample;
  sample.scene_id = scene.scene_id;
  sample.anchor_t = anchor_t;
  Rng rng(sample_stream_seed(noise_seed, scene.scene_id, anchor_t));
  sample.bev = temporal_stack(scene, anchor_t, spec, render, noise, rng);
  const EgoHistory history = ego_history(scene, anchor_t, spec);
  sample.history.reserve(history.samples.size() * 5);
  for (const auto& row : history.samples)
    sample.history.insert(sample.history.end(), row.begin(), row.end());
  sample.command = command_for(scene, anchor_t, spec);
  sample.target = future_target(scene, anchor_t, spec);
  return sample;
}

FrequencyDataset build_set(const SceneSet& scenes, double f,
                           const SampleSpec& spec, const RenderConfig& render,
                           const NoiseConfig& noise, std::uint64_t noise_seed,
                           Role role) {
  spec.validate();
  FrequencyDataset dataset;
  dataset.frequency = f;
  dataset.role = role;

  std::vector<const Scene*> ordered;
  ordered.reserve(scenes.scenes.size());
  for (const Scene& s : scenes.scenes) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const Scene* a, const Scene* b) {
              return a->scene_id < b->scene_id;
            });

  for (const Scene* scene : ordered) {
    const AnchorSet anchors = filter_valid_anchors(
        sample_timestamps(scene->native_timestamps, f), *scene, spec);
    for (double t : anchors.anchors)
      dataset.samples.push_back(
          materialize(*scene, t, spec, render, noise, noise_seed));
  }
  if (dataset.samples.empty())
    throw EmptyInputError("dataset has zero valid samples");
  return dataset;
}

}  // namespace

double FrequencyGrid::max() const {
  if (frequencies.empty()) throw EmptyInputError("empty frequency grid");
  return frequencies.back();
}

void FrequencyGrid::validate() const {
  if (frequencies.empty()) throw EmptyInputError("empty frequency grid");
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    if (frequencies[i] <= 0.0)
      throw FrequencyError("grid frequencies must be > 0");
    if (i > 0 && frequencies[i] <= frequencies[i - 1])
      throw FrequencyError("grid frequencies must be strictly increasing");
  }
}

AnchorSet sample_timestamps(const std::vector<double>& native, double f) {
  if (native.empty()) throw EmptyInputError("sample_timestamps: empty timeline");
  if (f <= 0.0) throw FrequencyError("sample_timestamps: f must be > 0");
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < native.size(); ++i) {
    const double gap = native[i] - native[i - 1];
    if (gap <= 0.0)
      throw ValidityError("sample_timestamps: timestamps not increasing");
    min_gap = std::min(min_gap, gap);
  }
  const double dt = 1.0 / f;
  if (native.size() > 1 && dt < min_gap - kTimeTol)
    throw FrequencyError("sample_timestamps: f exceeds the native rate");

  AnchorSet out;
  out.frequency = f;
  // Accumulated-phase rule: snap each ideal time first + j*dt to the nearest
  // native stamp, dropping duplicates.
  const double first = native.front();
  const double last = native.back();
  for (std::size_t j = 0;; ++j) {
    const double ideal = first + static_cast<double>(j) * dt;
    if (ideal > last + kTimeTol) break;
    auto it = std::lower_bound(native.begin(), native.end(), ideal);
    std::size_t idx;
    if (it == native.begin()) {
      idx = 0;
    } else if (it == native.end()) {
      idx = native.size() - 1;
    } else {
      const std::size_t hi = static_cast<std::size_t>(it - native.begin());
      idx = (ideal - native[hi - 1] <= native[hi] - ideal) ? hi - 1 : hi;
    }
    if (out.anchors.empty() || native[idx] > out.anchors.back())
      out.anchors.push_back(native[idx]);
  }
  return out;
}

AnchorSet filter_valid_anchors(const AnchorSet& anchorset, const Scene& scene,
                               const SampleSpec& spec) {
  spec.validate();
  AnchorSet out;
  out.scene_id = scene.scene_id;
  out.frequency = anchorset.frequency;
  const double start = scene.start_time();
  const double end = scene.end_time();
  for (double t : anchorset.anchors) {
    if (t - spec.history_window < start - kTimeTol) continue;
    if (t + spec.horizon > end + kTimeTol) continue;
    bool frames_ok = true;
    for (double off : spec.bev_frame_offsets) {
      if (t + off < start - kTimeTol || t + off > end + kTimeTol) {
        frames_ok = false;
        break;
      }
    }
    if (frames_ok) out.anchors.push_back(t);
  }
  return out;
}

FrequencyDataset build_training_set(const SceneSet& scenes, double f,
                                    const SampleSpec& spec,
                                    const RenderConfig& render,
                                    const NoiseConfig& noise,
                                    std::uint64_t noise_seed) {
  if (scenes.role != Role::train)
    throw UsageError("build_training_set: scene set role must be train");
  return build_set(scenes, f, spec, render, noise, noise_seed, Role::train);
}

FrequencyDataset build_validation_set(const SceneSet& scenes,
                                      const FrequencyGrid& grid,
                                      const SampleSpec& spec,
                                      const RenderConfig& render,
                                      const NoiseConfig& noise,
                                      std::uint64_t noise_seed) {
  if (scenes.role != Role::validation)
    throw UsageError("build_validation_set: scene set role must be validation");
  grid.validate();
  return build_set(scenes, grid.max(), spec, render, noise, noise_seed,
                   Role::validation);
}

std::vector<std::pair<double, std::size_t>> dataset_census(
    const FrequencyGrid& grid, const SceneSet& scenes, const SampleSpec& spec) {
  grid.validate();
  std::vector<std::pair<double, std::size_t>> census;
  for (double f : grid.frequencies) {
    std::size_t count = 0;
    for (const Scene& scene : scenes.scenes) {
      count += filter_valid_anchors(
                   sample_timestamps(scene.native_timestamps, f), scene, spec)
                   .anchors.size();
    }
    census.emplace_back(f, count);
  }
  return census;
}

namespace {

template <typename T>
void put_pod(std::vector<std::uint8_t>& out, const T& v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

}  // namespace

std::vector<std::uint8_t> serialize_sample(const TrainingSample& sample) {
  std::vector<std::uint8_t> out;
  put_pod(out, static_cast<std::uint32_t>(sample.scene_id.size()));
  out.insert(out.end(), sample.scene_id.begin(), sample.scene_id.end());
  put_pod(out, sample.anchor_t);
  put_pod(out, static_cast<std::uint32_t>(sample.bev.shape.size()));
  for (int d : sample.bev.shape) put_pod(out, static_cast<std::int32_t>(d));
  for (double v : sample.bev.data) put_pod(out, v);
  put_pod(out, static_cast<std::uint32_t>(sample.history.size()));
  for (double v : sample.history) put_pod(out, v);
  put_pod(out, static_cast<std::uint8_t>(sample.command));
  put_pod(out, sample.target.spacing);
  put_pod(out, sample.target.horizon);
  put_pod(out, static_cast<std::uint32_t>(sample.target.points.size()));
  for (const auto& p : sample.target.points) {
    put_pod(out, p[0]);
    put_pod(out, p[1]);
  }
  return out;
}

}  // namespace freqlab
