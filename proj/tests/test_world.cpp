#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "freqlab/subsample.hpp"
#include "freqlab/world.hpp"

using namespace freqlab;

namespace {

Scene make_scene(double freq, double duration,
                 const std::function<TrajectoryPoint(double)>& state) {
  Scene s;
  s.scene_id = "scene_t";
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

// Constant-curvature arc from the closed form: radius R = 1/kappa,
// angular rate omega = v * kappa.
Scene arc_scene(double v, double kappa, double freq = 10.0,
                double duration = 10.0) {
  const double radius = 1.0 / kappa;
  const double omega = v * kappa;
  return make_scene(freq, duration, [=](double t) {
    return TrajectoryPoint{0.0, radius * std::sin(omega * t),
                           radius * (1.0 - std::cos(omega * t)),
                           wrap_angle(omega * t), v};
  });
}

}  // namespace

TEST_CASE("world config validation") {
  WorldConfig c;
  c.num_scenes = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = WorldConfig{};
  c.speed_range = {5.0, 4.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = WorldConfig{};
  c.native_frequency = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = WorldConfig{};
  c.speed_range = {-1.0, 5.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_NOTHROW(WorldConfig{}.validate());
}

TEST_CASE("generated scenes are deterministic in the seed") {
  WorldConfig config;
  config.scene_duration = 5.0;
  const Scene a = generate_scene(1234, config);
  const Scene b = generate_scene(1234, config);
  const Scene c = generate_scene(1235, config);
  REQUIRE(a.ego.size() == b.ego.size());
  for (std::size_t i = 0; i < a.ego.size(); ++i) {
    CHECK(a.ego[i].x == b.ego[i].x);
    CHECK(a.ego[i].y == b.ego[i].y);
    CHECK(a.ego[i].heading == b.ego[i].heading);
  }
  CHECK(a.agents.size() == b.agents.size());
  // different seed must actually change the trajectory
  bool differs = a.ego.size() != c.ego.size();
  for (std::size_t i = 0; !differs && i < a.ego.size(); ++i)
    differs = a.ego[i].x != c.ego[i].x || a.ego[i].y != c.ego[i].y;
  CHECK(differs);
}

TEST_CASE("generated scene respects configured bounds") {
  WorldConfig config;
  config.scene_duration = 8.0;
  config.speed_range = {3.0, 9.0};
  config.num_agents_range = {2, 4};
  const Scene s = generate_scene(77, config);
  CHECK(s.native_timestamps.size() ==
        static_cast<std::size_t>(config.scene_duration *
                                 config.native_frequency) + 1);
  CHECK(s.ego.size() == s.native_timestamps.size());
  for (const auto& p : s.ego) {
    CHECK(p.speed >= config.speed_range.first - 1e-9);
    CHECK(p.speed <= config.speed_range.second + 1e-9);
    CHECK(p.heading >= -std::numbers::pi);
    CHECK(p.heading < std::numbers::pi);
  }
  CHECK(static_cast<int>(s.agents.size()) >= config.num_agents_range.first);
  CHECK(static_cast<int>(s.agents.size()) <= config.num_agents_range.second);
  CHECK(!s.map_polylines.empty());
}

TEST_CASE("degenerate ranges produce exact straight-line motion") {
  WorldConfig config;
  config.scene_duration = 6.0;
  config.speed_range = {10.0, 10.0};
  config.curvature_range = {0.0, 0.0};
  const Scene s = generate_scene(5, config);
  const double step = 10.0 / config.native_frequency;
  for (std::size_t i = 1; i < s.ego.size(); ++i) {
    const double d = std::hypot(s.ego[i].x - s.ego[i - 1].x,
                                s.ego[i].y - s.ego[i - 1].y);
    CHECK(d == doctest::Approx(step).epsilon(1e-9));
    CHECK(s.ego[i].heading == doctest::Approx(s.ego[0].heading));
    CHECK(s.ego[i].speed == doctest::Approx(10.0));
  }
}

TEST_CASE("scene stats recover speed and per-frame displacement") {
  WorldConfig config;
  config.num_scenes = 3;
  config.scene_duration = 6.0;
  config.native_frequency = 20.0;
  config.speed_range = {13.75, 13.75};
  config.curvature_range = {0.0, 0.0};
  config.seed = 9;
  const SceneSet set = generate_scene_set(config, Role::train);
  REQUIRE(set.scenes.size() == 3);
  const SceneStats at_native = scene_stats(set, 20.0);
  CHECK(at_native.mean_speed == doctest::Approx(13.75).epsilon(1e-9));
  CHECK(at_native.displacement_per_frame ==
        doctest::Approx(13.75 / 20.0).epsilon(1e-9));
  // coarser selection scales the gap, not the speed
  const SceneStats at_5 = scene_stats(set, 5.0);
  CHECK(at_5.mean_speed == doctest::Approx(13.75).epsilon(1e-9));
  CHECK(at_5.displacement_per_frame ==
        doctest::Approx(13.75 / 5.0).epsilon(1e-9));
}

TEST_CASE("stationary scene has zero displacement") {
  Scene s = make_scene(10.0, 4.0, [](double) {
    return TrajectoryPoint{0.0, 2.0, -1.0, 0.3, 0.0};
  });
  SceneSet set;
  set.scenes.push_back(s);
  const SceneStats stats = scene_stats(set, 10.0);
  CHECK(stats.mean_speed == 0.0);
  CHECK(stats.displacement_per_frame == 0.0);
}

TEST_CASE("ego pose interpolation and frame mapping") {
  const Scene s = straight_scene(10.0);
  const Pose mid = ego_pose(s, 1.05);  // between native samples
  CHECK(mid.x == doctest::Approx(10.5));
  CHECK(mid.y == doctest::Approx(0.0));

  // round trip: ego frame -> world -> ego frame
  Pose pose{3.0, -2.0, 0.7};
  const double ex = 4.2, ey = -1.3;
  const double wx = pose.x + std::cos(pose.heading) * ex -
                    std::sin(pose.heading) * ey;
  const double wy = pose.y + std::sin(pose.heading) * ex +
                    std::cos(pose.heading) * ey;
  const auto back = world_to_ego(pose, wx, wy);
  CHECK(back[0] == doctest::Approx(ex).epsilon(1e-12));
  CHECK(back[1] == doctest::Approx(ey).epsilon(1e-12));
}

TEST_CASE("ego history of constant-velocity motion") {
  const Scene s = straight_scene(10.0);
  SampleSpec spec;
  const EgoHistory hist = ego_history(s, 2.0, spec);
  REQUIRE(static_cast<int>(hist.samples.size()) ==
          spec.num_history_samples());
  for (std::size_t i = 0; i < hist.samples.size(); ++i) {
    const auto& row = hist.samples[i];
    const double rel_t = -1.0 + 0.1 * static_cast<double>(i);
    CHECK(row[0] == doctest::Approx(rel_t).epsilon(1e-9));
    CHECK(row[1] == doctest::Approx(10.0 * rel_t).epsilon(1e-9));
    CHECK(row[2] == doctest::Approx(0.0));
    CHECK(row[3] == doctest::Approx(0.0));
    CHECK(row[4] == doctest::Approx(10.0));
  }
  CHECK(hist.samples.back()[0] == 0.0);  // exact, not approximate
}

TEST_CASE("ego history rejects bad anchors") {
  const Scene s = straight_scene(10.0);
  SampleSpec spec;
  CHECK_THROWS_AS(ego_history(s, 2.03, spec), AnchorError);
  CHECK_THROWS_AS(ego_history(s, 0.5, spec), ValidityError);
  CHECK_NOTHROW(ego_history(s, 1.0, spec));
}

TEST_CASE("future target of straight and stationary motion") {
  SampleSpec spec;
  const Scene s = straight_scene(10.0);
  const Waypoints wp = future_target(s, 2.0, spec);
  REQUIRE(static_cast<int>(wp.points.size()) == spec.num_waypoints());
  for (std::size_t k = 0; k < wp.points.size(); ++k) {
    const double dt = spec.spacing * static_cast<double>(k + 1);
    CHECK(wp.points[k][0] == doctest::Approx(10.0 * dt).epsilon(1e-9));
    CHECK(wp.points[k][1] == doctest::Approx(0.0));
  }

  const Scene still = make_scene(10.0, 10.0, [](double) {
    return TrajectoryPoint{0.0, 1.0, 2.0, 0.4, 0.0};
  });
  const Waypoints wp0 = future_target(still, 2.0, spec);
  for (const auto& p : wp0.points) {
    CHECK(p[0] == doctest::Approx(0.0));
    CHECK(p[1] == doctest::Approx(0.0));
  }
}

TEST_CASE("future target of a constant-curvature arc matches the closed form") {
  const double v = 10.0, kappa = 0.05;
  const double radius = 1.0 / kappa, omega = v * kappa;
  const Scene s = arc_scene(v, kappa);
  SampleSpec spec;
  const Waypoints wp = future_target(s, 2.0, spec);
  for (std::size_t k = 0; k < wp.points.size(); ++k) {
    const double dt = spec.spacing * static_cast<double>(k + 1);
    // relative motion along the circle is pose-invariant
    CHECK(wp.points[k][0] ==
          doctest::Approx(radius * std::sin(omega * dt)).epsilon(1e-9));
    CHECK(wp.points[k][1] ==
          doctest::Approx(radius * (1.0 - std::cos(omega * dt))).epsilon(1e-9));
  }
}

TEST_CASE("windows do not depend on how anchors were selected") {
  const Scene s = arc_scene(8.0, 0.03);
  SampleSpec spec;
  const EgoHistory h1 = ego_history(s, 3.0, spec);
  const EgoHistory h2 = ego_history(s, 3.0, spec);
  CHECK(h1.samples == h2.samples);
  const Waypoints w1 = future_target(s, 3.0, spec);
  const Waypoints w2 = future_target(s, 3.0, spec);
  CHECK(w1.points == w2.points);
}

TEST_CASE("navigation command from net heading change") {
  SampleSpec spec;
  // 10 m/s at 0.02 1/m curvature turns 0.6 rad (34 deg) in 3 s: left
  CHECK(command_for(arc_scene(10.0, 0.02), 2.0, spec) == Command::left);
  CHECK(command_for(arc_scene(10.0, -0.02), 2.0, spec) == Command::right);
  CHECK(command_for(straight_scene(10.0), 2.0, spec) == Command::straight);
  // 0.28 rad net change (16 deg) is just past the threshold
  CHECK(command_for(arc_scene(10.0, 0.0094), 2.0, spec) == Command::left);
  // 14 deg stays straight
  CHECK(command_for(arc_scene(10.0, 0.0082), 2.0, spec) == Command::straight);
  CHECK(command_name(Command::left) == std::string("left"));
  CHECK(command_name(Command::straight) == std::string("straight"));
  CHECK(command_name(Command::right) == std::string("right"));
}

TEST_CASE("wrap_angle maps into [-pi, pi)") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(std::numbers::pi) == doctest::Approx(-std::numbers::pi));
  CHECK(wrap_angle(3.0 * std::numbers::pi / 2.0) ==
        doctest::Approx(-std::numbers::pi / 2.0));
  CHECK(wrap_angle(-5.0 * std::numbers::pi / 2.0) ==
        doctest::Approx(-std::numbers::pi / 2.0));
}

TEST_CASE("scene sets give train and validation distinct scenes") {
  WorldConfig config;
  config.num_scenes = 2;
  config.scene_duration = 4.0;
  config.seed = 21;
  const SceneSet train = generate_scene_set(config, Role::train);
  const SceneSet val = generate_scene_set(config, Role::validation);
  CHECK(train.role == Role::train);
  CHECK(val.role == Role::validation);
  REQUIRE(train.scenes.size() == 2);
  REQUIRE(val.scenes.size() == 2);
  CHECK(train.scenes[0].scene_id != val.scenes[0].scene_id);
  CHECK(train.scenes[0].scene_id != train.scenes[1].scene_id);
}
