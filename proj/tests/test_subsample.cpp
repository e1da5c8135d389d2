#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "freqlab/subsample.hpp"

using namespace freqlab;

namespace {

std::vector<double> uniform_timeline(double freq, double duration) {
  std::vector<double> out;
  const int n = static_cast<int>(std::llround(duration * freq));
  for (int i = 0; i <= n; ++i)
    out.push_back(static_cast<double>(i) / freq);
  return out;
}

// Reference anchor selection, written from the rule statement rather than the
// library code: walk the ideal clock, snap to the nearest stamp, dedupe.
std::vector<double> oracle_anchors(const std::vector<double>& native,
                                   double f) {
  std::vector<double> out;
  const double dt = 1.0 / f;
  for (int j = 0;; ++j) {
    const double ideal = native.front() + j * dt;
    if (ideal > native.back() + 1e-9) break;
    double best = native.front();
    for (double t : native)
      if (std::abs(t - ideal) < std::abs(best - ideal)) best = t;
    if (out.empty() || best > out.back()) out.push_back(best);
  }
  return out;
}

SceneSet straight_set(int n_scenes, double duration, Role role,
                      std::uint64_t seed = 3) {
  WorldConfig config;
  config.num_scenes = n_scenes;
  config.scene_duration = duration;
  config.seed = seed;
  return generate_scene_set(config, role);
}

}  // namespace

TEST_CASE("frequency grid validation") {
  CHECK_THROWS_AS(FrequencyGrid{}.validate(), EmptyInputError);
  CHECK_THROWS_AS((FrequencyGrid{{2.0, 2.0}}.validate()), FrequencyError);
  CHECK_THROWS_AS((FrequencyGrid{{4.0, 2.0}}.validate()), FrequencyError);
  CHECK_THROWS_AS((FrequencyGrid{{0.0, 2.0}}.validate()), FrequencyError);
  const FrequencyGrid grid{{2.0, 6.0, 10.0}};
  CHECK_NOTHROW(grid.validate());
  CHECK(grid.max() == 10.0);
}

TEST_CASE("anchor selection at a divisor frequency") {
  const auto native = uniform_timeline(10.0, 2.0);  // 21 stamps
  const AnchorSet set = sample_timestamps(native, 5.0);
  REQUIRE(set.anchors.size() == 11);
  for (std::size_t j = 0; j < set.anchors.size(); ++j)
    CHECK(set.anchors[j] == doctest::Approx(0.2 * j).epsilon(1e-12));
}

TEST_CASE("anchor selection at the native frequency is the identity") {
  const auto native = uniform_timeline(10.0, 3.0);
  const AnchorSet set = sample_timestamps(native, 10.0);
  CHECK(set.anchors == native);
}

TEST_CASE("anchor selection at non-divisor frequencies matches the oracle") {
  for (double f : {3.0, 4.0, 6.0, 7.0, 9.0}) {
    const auto native = uniform_timeline(10.0, 5.0);
    const AnchorSet set = sample_timestamps(native, f);
    CHECK(set.anchors == oracle_anchors(native, f));
    // anchors must be native stamps, strictly increasing
    for (std::size_t i = 0; i < set.anchors.size(); ++i) {
      CHECK(std::binary_search(native.begin(), native.end(), set.anchors[i]));
      if (i > 0) CHECK(set.anchors[i] > set.anchors[i - 1]);
    }
    CHECK(set.anchors.front() == native.front());
  }
}

TEST_CASE("anchor counts track the requested frequency") {
  const auto native = uniform_timeline(10.0, 10.0);
  std::size_t prev = 0;
  for (double f : {2.0, 4.0, 6.0, 8.0, 10.0}) {
    const auto set = sample_timestamps(native, f);
    // about duration * f + 1
    CHECK(std::abs(static_cast<double>(set.anchors.size()) - (10.0 * f + 1.0)) <=
          1.0);
    CHECK(set.anchors.size() > prev);
    prev = set.anchors.size();
  }
}

TEST_CASE("divisor frequencies nest") {
  const auto native = uniform_timeline(10.0, 8.0);
  const auto lo = sample_timestamps(native, 2.0).anchors;
  const auto hi = sample_timestamps(native, 10.0).anchors;
  for (double t : lo)
    CHECK(std::binary_search(hi.begin(), hi.end(), t));
}

TEST_CASE("anchor selection error cases") {
  CHECK_THROWS_AS(sample_timestamps({}, 5.0), EmptyInputError);
  const auto native = uniform_timeline(10.0, 2.0);
  CHECK_THROWS_AS(sample_timestamps(native, 0.0), FrequencyError);
  CHECK_THROWS_AS(sample_timestamps(native, 20.0), FrequencyError);
  CHECK_THROWS_AS(sample_timestamps({0.0, 0.2, 0.1}, 5.0), ValidityError);
}

TEST_CASE("validity filter keeps exactly the fitting anchors") {
  // span [0, 5]; window 1 s back, 3 s forward, frames at -0.5 and 0:
  // valid anchors at 2 Hz are 1.0 through 2.0
  Scene scene;
  scene.scene_id = "s";
  scene.native_frequency = 10.0;
  scene.native_timestamps = uniform_timeline(10.0, 5.0);
  for (double t : scene.native_timestamps)
    scene.ego.push_back({t, t, 0.0, 0.0, 1.0});
  SampleSpec spec;
  const AnchorSet all = sample_timestamps(scene.native_timestamps, 2.0);
  const AnchorSet valid = filter_valid_anchors(all, scene, spec);
  const std::vector<double> expected = {1.0, 1.5, 2.0};
  REQUIRE(valid.anchors.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(valid.anchors[i] == doctest::Approx(expected[i]).epsilon(1e-12));

  // boundary anchors count: t = 1.0 uses the full history to t = 0 exactly
  CHECK(valid.anchors.front() - spec.history_window ==
        doctest::Approx(scene.start_time()));

  SampleSpec too_long = spec;
  too_long.horizon = 10.0;
  CHECK(filter_valid_anchors(all, scene, too_long).anchors.empty());
}

TEST_CASE("census is monotone in frequency and matches direct counting") {
  const SceneSet set = straight_set(3, 8.0, Role::train);
  const FrequencyGrid grid{{2.0, 4.0, 6.0, 8.0, 10.0}};
  SampleSpec spec;
  const auto census = dataset_census(grid, set, spec);
  REQUIRE(census.size() == grid.frequencies.size());
  for (std::size_t i = 0; i < census.size(); ++i) {
    CHECK(census[i].first == grid.frequencies[i]);
    std::size_t direct = 0;
    for (const Scene& scene : set.scenes)
      direct += filter_valid_anchors(
                    sample_timestamps(scene.native_timestamps,
                                      census[i].first),
                    scene, spec)
                    .anchors.size();
    CHECK(census[i].second == direct);
    if (i > 0) CHECK(census[i].second > census[i - 1].second);
  }
  // rough proportionality: count(10) / count(2) near 5
  const double ratio = static_cast<double>(census.back().second) /
                       static_cast<double>(census.front().second);
  CHECK(ratio > 3.5);
  CHECK(ratio < 6.5);
}

TEST_CASE("training sets are ordered and sized by frequency") {
  const SceneSet set = straight_set(2, 6.0, Role::train);
  RenderConfig render;
  render.image_size = 16;
  NoiseConfig noise;
  SampleSpec spec;
  const auto d5 = build_training_set(set, 5.0, spec, render, noise, 7);
  const auto d10 = build_training_set(set, 10.0, spec, render, noise, 7);
  CHECK(d5.role == Role::train);
  const double ratio = static_cast<double>(d10.samples.size()) /
                       static_cast<double>(d5.samples.size());
  CHECK(ratio > 1.8);
  CHECK(ratio < 2.2);
  for (std::size_t i = 1; i < d10.samples.size(); ++i) {
    const auto& a = d10.samples[i - 1];
    const auto& b = d10.samples[i];
    CHECK((a.scene_id < b.scene_id ||
           (a.scene_id == b.scene_id && a.anchor_t < b.anchor_t)));
  }
}

TEST_CASE("role mismatches and empty outputs are rejected") {
  RenderConfig render;
  render.image_size = 16;
  NoiseConfig noise;
  SampleSpec spec;
  const SceneSet val = straight_set(1, 6.0, Role::validation);
  CHECK_THROWS_AS(build_training_set(val, 5.0, spec, render, noise, 7),
                  UsageError);
  const SceneSet train = straight_set(1, 6.0, Role::train);
  CHECK_THROWS_AS(
      build_validation_set(train, FrequencyGrid{{5.0}}, spec, render, noise, 7),
      UsageError);

  // horizon longer than every scene leaves nothing valid
  SampleSpec too_long = spec;
  too_long.horizon = 10.0;
  too_long.spacing = 0.5;
  CHECK_THROWS_AS(build_training_set(train, 5.0, too_long, render, noise, 7),
                  EmptyInputError);
}

TEST_CASE("validation sets use the top of the grid") {
  const SceneSet val = straight_set(1, 6.0, Role::validation);
  RenderConfig render;
  render.image_size = 16;
  NoiseConfig noise;
  SampleSpec spec;
  const FrequencyGrid grid{{2.0, 5.0, 10.0}};
  const auto vs = build_validation_set(val, grid, spec, render, noise, 7);
  CHECK(vs.frequency == 10.0);
  CHECK(vs.role == Role::validation);
  const auto direct = build_validation_set(val, FrequencyGrid{{10.0}}, spec,
                                           render, noise, 7);
  REQUIRE(vs.samples.size() == direct.samples.size());
  for (std::size_t i = 0; i < vs.samples.size(); ++i)
    CHECK(serialize_sample(vs.samples[i]) ==
          serialize_sample(direct.samples[i]));
}

TEST_CASE("a sample's bytes do not depend on the training frequency") {
  const SceneSet set = straight_set(1, 8.0, Role::train);
  RenderConfig render;
  render.image_size = 16;
  NoiseConfig noise;  // enabled, sigma 0.5, jitter 2
  SampleSpec spec;
  const auto lo = build_training_set(set, 2.0, spec, render, noise, 99);
  const auto hi = build_training_set(set, 10.0, spec, render, noise, 99);
  std::size_t shared = 0;
  for (const auto& a : lo.samples) {
    for (const auto& b : hi.samples) {
      if (a.scene_id == b.scene_id && a.anchor_t == b.anchor_t) {
        CHECK(serialize_sample(a) == serialize_sample(b));
        ++shared;
      }
    }
  }
  CHECK(shared == lo.samples.size());  // divisor grid: every anchor is shared
}

TEST_CASE("noise seed changes sample bytes, identity preserves them") {
  const SceneSet set = straight_set(1, 6.0, Role::train);
  RenderConfig render;
  render.image_size = 16;
  NoiseConfig noise;
  SampleSpec spec;
  const auto a = build_training_set(set, 5.0, spec, render, noise, 1);
  const auto b = build_training_set(set, 5.0, spec, render, noise, 1);
  const auto c = build_training_set(set, 5.0, spec, render, noise, 2);
  REQUIRE(a.samples.size() == b.samples.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(serialize_sample(a.samples[i]) == serialize_sample(b.samples[i]));
    if (serialize_sample(a.samples[i]) != serialize_sample(c.samples[i]))
      any_diff = true;
  }
  CHECK(any_diff);
}
