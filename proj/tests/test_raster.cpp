#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "freqlab/raster.hpp"

using namespace freqlab;

namespace {

Scene make_scene(double freq, double duration,
                 const std::function<TrajectoryPoint(double)>& state) {
  Scene s;
  s.scene_id = "scene_r";
  s.native_frequency = freq;
  const int n = static_cast<int>(std::llround(duration * freq));
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / freq;
    s.native_timestamps.push_back(t);
    TrajectoryPoint p = state(t);
    p.t = t;
    s.ego.push_back(p);
  }
  return s;
}

Scene straight_scene(double v, double freq = 10.0, double duration = 10.0) {
  return make_scene(freq, duration, [v](double t) {
    return TrajectoryPoint{0.0, v * t, 0.0, 0.0, v};
  });
}

double channel_sum(const BevImage& img, int channel) {
  double total = 0.0;
  for (int y = 0; y < img.size; ++y)
    for (int x = 0; x < img.size; ++x) total += img.at(channel, y, x);
  return total;
}

}  // namespace

TEST_CASE("render config defaults and validation") {
  RenderConfig c;
  CHECK(c.anchor_pixel() == std::array<int, 2>{24, 16});
  c.ego_anchor_pixel = {5, 7};
  CHECK(c.anchor_pixel() == std::array<int, 2>{5, 7});
  c.image_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RenderConfig{};
  c.meters_per_pixel = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  NoiseConfig n;
  n.background_sigma = -1.0;
  CHECK_THROWS_AS(n.validate(), ConfigError);
  n = NoiseConfig{};
  n.jitter_max = -1;
  CHECK_THROWS_AS(n.validate(), ConfigError);
}

TEST_CASE("empty scene rasters to ego marker only") {
  const Scene s = make_scene(10.0, 2.0, [](double) {
    return TrajectoryPoint{0.0, 0.0, 0.0, 0.0, 0.0};
  });
  RenderConfig config;
  const BevImage img = rasterize(s, 1.0, config);
  CHECK(img.channels == kBevChannels);
  CHECK(img.size == config.image_size);
  CHECK(channel_sum(img, kMapChannel) == 0.0);
  CHECK(channel_sum(img, kAgentChannel) == 0.0);
  // ego marker covers the anchor pixel and is 0/1 valued
  const auto anchor = config.anchor_pixel();
  CHECK(img.at(kEgoChannel, anchor[0], anchor[1]) == 1.0);
  for (double v : img.data) CHECK((v == 0.0 || v == 1.0));
}

TEST_CASE("agents land at the expected pixel offset") {
  // agent 10 m dead ahead: 20 px up from the anchor at 0.5 m/px
  Scene s = make_scene(10.0, 2.0, [](double) {
    return TrajectoryPoint{0.0, 0.0, 0.0, 0.0, 0.0};
  });
  std::vector<TrajectoryPoint> agent;
  for (double t : s.native_timestamps)
    agent.push_back({t, 10.0, 0.0, 0.0, 0.0});
  s.agents.push_back(agent);

  RenderConfig config;
  config.meters_per_pixel = 0.5;
  const BevImage img = rasterize(s, 1.0, config);
  const auto anchor = config.anchor_pixel();
  CHECK(img.at(kAgentChannel, anchor[0] - 20, anchor[1]) == 1.0);
  CHECK(img.at(kAgentChannel, anchor[0], anchor[1]) == 0.0);
}

TEST_CASE("raster rotates with the ego heading") {
  // ego faces +y in the world; a point at world (0, d) is straight ahead
  // and a point at world (d, 0) is to the ego's right
  Scene s = make_scene(10.0, 2.0, [](double) {
    return TrajectoryPoint{0.0, 0.0, 0.0, std::numbers::pi / 2.0, 0.0};
  });
  std::vector<TrajectoryPoint> ahead, right;
  for (double t : s.native_timestamps) {
    ahead.push_back({t, 0.0, 10.0, 0.0, 0.0});
    right.push_back({t, 10.0, 0.0, 0.0, 0.0});
  }
  s.agents.push_back(ahead);
  s.agents.push_back(right);

  RenderConfig config;  // 1 m/px
  const BevImage img = rasterize(s, 1.0, config);
  const auto anchor = config.anchor_pixel();
  CHECK(img.at(kAgentChannel, anchor[0] - 10, anchor[1]) == 1.0);
  CHECK(img.at(kAgentChannel, anchor[0], anchor[1] + 10) == 1.0);
}

TEST_CASE("rasterize rejects off-grid anchors") {
  const Scene s = straight_scene(5.0);
  RenderConfig config;
  CHECK_THROWS_AS(rasterize(s, 1.03, config), AnchorError);
  CHECK_NOTHROW(rasterize(s, 1.1, config));
}

TEST_CASE("disabled or zero noise leaves the image untouched") {
  const Scene s = straight_scene(5.0);
  RenderConfig config;
  const BevImage img = rasterize(s, 2.0, config);

  NoiseConfig off;
  off.enabled = false;
  Rng rng1(1);
  CHECK(add_noise(img, off, rng1).data == img.data);

  NoiseConfig zero;
  zero.background_sigma = 0.0;
  zero.jitter_max = 0;
  Rng rng2(1);
  CHECK(add_noise(img, zero, rng2).data == img.data);
}

TEST_CASE("jitter is a bounded global translation") {
  Scene s = make_scene(10.0, 2.0, [](double) {
    return TrajectoryPoint{0.0, 0.0, 0.0, 0.0, 0.0};
  });
  RenderConfig config;
  config.image_size = 16;
  const BevImage img = rasterize(s, 1.0, config);

  NoiseConfig jitter_only;
  jitter_only.background_sigma = 0.0;
  jitter_only.jitter_max = 2;
  bool any_shifted = false;
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    Rng rng(seed);
    const BevImage noised = add_noise(img, jitter_only, rng);
    // the output must equal the input translated by some (dr, dc) in bounds
    bool matched = false;
    for (int dr = -2; dr <= 2 && !matched; ++dr) {
      for (int dc = -2; dc <= 2 && !matched; ++dc) {
        bool equal = true;
        for (int c = 0; c < img.channels && equal; ++c)
          for (int y = 0; y < img.size && equal; ++y)
            for (int x = 0; x < img.size && equal; ++x) {
              const int sy = y - dr, sx = x - dc;
              const double src =
                  (sy >= 0 && sy < img.size && sx >= 0 && sx < img.size)
                      ? img.at(c, sy, sx)
                      : 0.0;
              if (noised.at(c, y, x) != src) equal = false;
            }
        if (equal) {
          matched = true;
          if (dr != 0 || dc != 0) any_shifted = true;
        }
      }
    }
    CHECK(matched);
  }
  CHECK(any_shifted);
}

TEST_CASE("background noise has the configured statistics") {
  // large empty image: sample mean within 4 sigma / sqrt(N) of zero and
  // sample std within 1% of sigma
  BevImage img;
  img.channels = 1;
  img.size = 1024;  // ~1e6 pixels
  img.data.assign(static_cast<std::size_t>(img.size) * img.size, 0.0);
  NoiseConfig noise;
  noise.background_sigma = 0.5;
  noise.jitter_max = 0;
  Rng rng(2024);
  const BevImage noised = add_noise(img, noise, rng);

  const double n = static_cast<double>(noised.data.size());
  double mean = 0.0;
  for (double v : noised.data) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : noised.data) var += (v - mean) * (v - mean);
  var /= n;
  CHECK(std::abs(mean) < 4.0 * noise.background_sigma / std::sqrt(n));
  CHECK(std::sqrt(var) == doctest::Approx(noise.background_sigma).epsilon(0.01));
}

TEST_CASE("temporal stack shape and determinism") {
  const Scene s = straight_scene(10.0);
  SampleSpec spec;
  RenderConfig render;
  NoiseConfig noise;
  Rng rng_a(5), rng_b(5), rng_c(6);
  const Tensor a = temporal_stack(s, 2.0, spec, render, noise, rng_a);
  const Tensor b = temporal_stack(s, 2.0, spec, render, noise, rng_b);
  const Tensor c = temporal_stack(s, 2.0, spec, render, noise, rng_c);
  CHECK(a.shape == std::vector<int>{
                       static_cast<int>(spec.bev_frame_offsets.size()) *
                           kBevChannels,
                       render.image_size, render.image_size});
  CHECK(a.data == b.data);
  CHECK(a.data != c.data);

  CHECK_THROWS_AS(temporal_stack(s, 0.2, spec, render, noise, rng_a),
                  ValidityError);
}

TEST_CASE("map content shifts between frames by the ego displacement") {
  // 10 m/s straight-line motion with frames at -0.5 s and 0: the earlier
  // frame sees every static map feature 5 m (here 5 px) further ahead
  Scene s = straight_scene(10.0);
  for (double x = 14.0; x <= 34.0; x += 4.0)
    s.map_polylines.push_back({{{x, 1.0}}, {{x, 3.0}}});

  SampleSpec spec;  // offsets {-0.5, 0}
  RenderConfig render;
  NoiseConfig noise;
  noise.enabled = false;
  Rng rng(0);
  const Tensor stack = temporal_stack(s, 2.0, spec, render, noise, rng);
  const int size = render.image_size;
  const auto at = [&](int frame, int channel, int row, int col) {
    return stack
        .data[static_cast<std::size_t>(
            ((frame * kBevChannels + channel) * size + row) * size + col)];
  };
  double feature_pixels = 0.0;
  for (int r = 0; r + 5 < size; ++r)
    for (int c = 0; c < size; ++c) {
      CHECK(at(0, kMapChannel, r, c) == at(1, kMapChannel, r + 5, c));
      feature_pixels += at(0, kMapChannel, r, c);
    }
  CHECK(feature_pixels > 0.0);  // the comparison covered real content
  // both frames keep the ego marker at the anchor pixel
  const auto anchor = render.anchor_pixel();
  CHECK(at(0, kEgoChannel, anchor[0], anchor[1]) == 1.0);
  CHECK(at(1, kEgoChannel, anchor[0], anchor[1]) == 1.0);
}
