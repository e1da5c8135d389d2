#include "freqlab/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "freqlab/rng.hpp"
#include "freqlab/subsample.hpp"

namespace freqlab {

namespace {

constexpr double kTimeTol = 1e-9;
constexpr double kMaxAccel = 2.0;  // m/s^2 ramp toward per-segment target speed

double lerp(double a, double b, double w) { return a + (b - a) * w; }

double lerp_angle(double a, double b, double w) {
  return wrap_angle(a + wrap_angle(b - a) * w);
}

// Fractional native index of time t, clamped to the scene span.
double native_index(const Scene& scene, double t) {
  const double idx = (t - scene.start_time()) * scene.native_frequency;
  const double last = static_cast<double>(scene.native_timestamps.size()) - 1.0;
  return std::clamp(idx, 0.0, last);
}

TrajectoryPoint ego_state(const Scene& scene, double t) {
  const double idx = native_index(scene, t);
  const auto lo = static_cast<std::size_t>(std::floor(idx));
  const auto hi = std::min(lo + 1, scene.ego.size() - 1);
  const double w = idx - static_cast<double>(lo);
  const TrajectoryPoint& a = scene.ego[lo];
  const TrajectoryPoint& b = scene.ego[hi];
  TrajectoryPoint p;
  p.t = t;
  p.x = lerp(a.x, b.x, w);
  p.y = lerp(a.y, b.y, w);
  p.heading = lerp_angle(a.heading, b.heading, w);
  p.speed = lerp(a.speed, b.speed, w);
  return p;
}

bool on_native_grid(const Scene& scene, double t) {
  const double idx = (t - scene.start_time()) * scene.native_frequency;
  return std::abs(idx - std::round(idx)) < kTimeTol * scene.native_frequency &&
         idx > -0.5 &&
         idx < static_cast<double>(scene.native_timestamps.size()) - 0.5;
}

}  // namespace

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  return a - std::numbers::pi;
}

const char* command_name(Command c) {
  switch (c) {
    case Command::left: return "left";
    case Command::right: return "right";
    case Command::straight: return "straight";
  }
  return "straight";
}

void WorldConfig::validate() const {
  if (num_scenes < 1) throw ConfigError("num_scenes must be >= 1");
  if (scene_duration <= 0.0) throw ConfigError("scene_duration must be > 0");
  if (native_frequency <= 0.0)
    throw ConfigError("native_frequency must be > 0");
  if (!(speed_range.first <= speed_range.second) ||
      !std::isfinite(speed_range.first) || !std::isfinite(speed_range.second) ||
      speed_range.first < 0.0)
    throw ConfigError("invalid speed_range");
  if (!(curvature_range.first <= curvature_range.second) ||
      !std::isfinite(curvature_range.first) ||
      !std::isfinite(curvature_range.second))
    throw ConfigError("invalid curvature_range");
  if (num_agents_range.first > num_agents_range.second ||
      num_agents_range.first < 0)
    throw ConfigError("invalid num_agents_range");
  if (map_density < 0) throw ConfigError("map_density must be >= 0");
}

Pose ego_pose(const Scene& scene, double t) {
  const TrajectoryPoint p = ego_state(scene, t);
  return {p.x, p.y, p.heading};
}

std::array<double, 2> world_to_ego(const Pose& pose, double wx, double wy) {
  const double dx = wx - pose.x;
  const double dy = wy - pose.y;
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  // x forward, y left.
  return {c * dx + s * dy, -s * dx + c * dy};
}

Scene generate_scene(std::uint64_t seed, const WorldConfig& config) {
  config.validate();
  Rng rng(Rng::derive(seed, {Rng::hash_string("scene")}));

  Scene scene;
  scene.native_frequency = config.native_frequency;
  const int n =
      static_cast<int>(std::llround(config.scene_duration * config.native_frequency)) + 1;
  const double dt = 1.0 / config.native_frequency;
  scene.native_timestamps.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    scene.native_timestamps[static_cast<std::size_t>(i)] =
        static_cast<double>(i) / config.native_frequency;

  // Ego: piecewise constant-curvature segments with a bounded-rate speed ramp
  // toward a per-segment target speed.
  TrajectoryPoint p;
  p.t = 0.0;
  p.x = 0.0;
  p.y = 0.0;
  p.heading = wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
  p.speed = rng.uniform(config.speed_range.first, config.speed_range.second);
  double segment_left = rng.uniform(2.0, 4.0);
  double curvature =
      rng.uniform(config.curvature_range.first, config.curvature_range.second);
  double target_speed =
      rng.uniform(config.speed_range.first, config.speed_range.second);
  scene.ego.reserve(static_cast<std::size_t>(n));
  scene.ego.push_back(p);
  for (int i = 1; i < n; ++i) {
    if (segment_left <= 0.0) {
      segment_left = rng.uniform(2.0, 4.0);
      curvature = rng.uniform(config.curvature_range.first,
                              config.curvature_range.second);
      target_speed =
          rng.uniform(config.speed_range.first, config.speed_range.second);
    }
    const double dv = std::clamp(target_speed - p.speed, -kMaxAccel * dt,
                                 kMaxAccel * dt);
    p.speed = std::clamp(p.speed + dv, config.speed_range.first,
                         config.speed_range.second);
    p.x += p.speed * std::cos(p.heading) * dt;
    p.y += p.speed * std::sin(p.heading) * dt;
    p.heading = wrap_angle(p.heading + curvature * p.speed * dt);
    p.t = scene.native_timestamps[static_cast<std::size_t>(i)];
    segment_left -= dt;
    scene.ego.push_back(p);
  }

  // Agents: constant-velocity tracks spawned around the ego start.
  const int num_agents = static_cast<int>(rng.uniform_int(
      config.num_agents_range.first, config.num_agents_range.second));
  for (int a = 0; a < num_agents; ++a) {
    TrajectoryPoint ap;
    ap.x = scene.ego.front().x + rng.uniform(-40.0, 40.0);
    ap.y = scene.ego.front().y + rng.uniform(-40.0, 40.0);
    ap.heading = wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
    ap.speed = rng.uniform(0.0, config.speed_range.second);
    std::vector<TrajectoryPoint> track;
    track.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      ap.t = scene.native_timestamps[static_cast<std::size_t>(i)];
      track.push_back(ap);
      ap.x += ap.speed * std::cos(ap.heading) * dt;
      ap.y += ap.speed * std::sin(ap.heading) * dt;
    }
    scene.agents.push_back(std::move(track));
  }

  // Map: lane-like boundaries offset from the ego path, then random straight
  // segments near the traversed region.
  int polylines_left = config.map_density;
  for (double side : {3.0, -3.0}) {
    if (polylines_left <= 0) break;
    std::vector<std::array<double, 2>> lane;
    const int step = std::max(1, static_cast<int>(std::llround(
                                     0.5 * config.native_frequency)));
    for (int i = 0; i < n; i += step) {
      const TrajectoryPoint& e = scene.ego[static_cast<std::size_t>(i)];
      lane.push_back({e.x - side * std::sin(e.heading),
                      e.y + side * std::cos(e.heading)});
    }
    scene.map_polylines.push_back(std::move(lane));
    --polylines_left;
  }
  double min_x = scene.ego.front().x, max_x = min_x;
  double min_y = scene.ego.front().y, max_y = min_y;
  for (const auto& e : scene.ego) {
    min_x = std::min(min_x, e.x);
    max_x = std::max(max_x, e.x);
    min_y = std::min(min_y, e.y);
    max_y = std::max(max_y, e.y);
  }
  for (; polylines_left > 0; --polylines_left) {
    const double x0 = rng.uniform(min_x - 30.0, max_x + 30.0);
    const double y0 = rng.uniform(min_y - 30.0, max_y + 30.0);
    const double ang = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double len = rng.uniform(20.0, 60.0);
    scene.map_polylines.push_back(
        {{x0, y0}, {x0 + len * std::cos(ang), y0 + len * std::sin(ang)}});
  }

  char id[32];
  std::snprintf(id, sizeof(id), "scene_%016llx",
                static_cast<unsigned long long>(seed));
  scene.scene_id = id;
  return scene;
}

SceneSet generate_scene_set(const WorldConfig& config, Role role) {
  config.validate();
  SceneSet set;
  set.role = role;
  const std::uint64_t role_key =
      Rng::hash_string(role == Role::train ? "train" : "validation");
  set.scenes.reserve(static_cast<std::size_t>(config.num_scenes));
  for (int i = 0; i < config.num_scenes; ++i) {
    const std::uint64_t scene_seed =
        Rng::derive(config.seed, {role_key, static_cast<std::uint64_t>(i)});
    set.scenes.push_back(generate_scene(scene_seed, config));
  }
  return set;
}

EgoHistory ego_history(const Scene& scene, double t, const SampleSpec& spec) {
  spec.validate();
  if (!on_native_grid(scene, t))
    throw AnchorError("ego_history: t is not a native timestamp");
  if (t - spec.history_window < scene.start_time() - kTimeTol)
    throw ValidityError("ego_history: window precedes scene start");

  const Pose anchor = ego_pose(scene, t);
  const int count = spec.num_history_samples();
  EgoHistory history;
  history.samples.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double rel_t =
        -spec.history_window +
        static_cast<double>(k) / spec.history_rate;
    const TrajectoryPoint s = ego_state(scene, t + rel_t);
    const auto [ex, ey] = world_to_ego(anchor, s.x, s.y);
    history.samples.push_back(
        {rel_t, ex, ey, wrap_angle(s.heading - anchor.heading), s.speed});
  }
  history.samples.back()[0] = 0.0;
  return history;
}

Waypoints future_target(const Scene& scene, double t, const SampleSpec& spec) {
  spec.validate();
  if (t + spec.horizon > scene.end_time() + kTimeTol)
    throw ValidityError("future_target: horizon exceeds scene span");
  const Pose anchor = ego_pose(scene, t);
  Waypoints wp;
  wp.spacing = spec.spacing;
  wp.horizon = spec.horizon;
  const int count = spec.num_waypoints();
  wp.points.reserve(static_cast<std::size_t>(count));
  for (int k = 1; k <= count; ++k) {
    const TrajectoryPoint s =
        ego_state(scene, t + static_cast<double>(k) * spec.spacing);
    wp.points.push_back(world_to_ego(anchor, s.x, s.y));
  }
  return wp;
}

Command command_for(const Scene& scene, double t, const SampleSpec& spec) {
  const double h0 = ego_state(scene, t).heading;
  const double h1 = ego_state(scene, t + spec.horizon).heading;
  const double net = wrap_angle(h1 - h0);
  constexpr double threshold = 15.0 * std::numbers::pi / 180.0;
  if (net > threshold) return Command::left;
  if (net < -threshold) return Command::right;
  return Command::straight;
}

SceneStats scene_stats(const SceneSet& set, double frequency) {
  if (set.scenes.empty()) throw EmptyInputError("scene_stats: empty scene set");
  SceneStats stats;
  double speed_sum = 0.0;
  std::size_t speed_count = 0;
  double disp_sum = 0.0;
  std::size_t disp_count = 0;
  for (const Scene& scene : set.scenes) {
    for (const auto& e : scene.ego) speed_sum += e.speed;
    speed_count += scene.ego.size();
    const AnchorSet anchors = sample_timestamps(scene.native_timestamps, frequency);
    stats.sample_count += anchors.anchors.size();
    for (std::size_t j = 1; j < anchors.anchors.size(); ++j) {
      const Pose a = ego_pose(scene, anchors.anchors[j - 1]);
      const Pose b = ego_pose(scene, anchors.anchors[j]);
      disp_sum += std::hypot(b.x - a.x, b.y - a.y);
      ++disp_count;
    }
  }
  stats.mean_speed = speed_sum / static_cast<double>(speed_count);
  stats.displacement_per_frame =
      disp_count > 0 ? disp_sum / static_cast<double>(disp_count) : 0.0;
  return stats;
}

void write_scene_text(const Scene& scene, std::ostream& out) {
  out << "# scene " << scene.scene_id << " native_hz " << scene.native_frequency
      << "\n";
  char line[160];
  for (const auto& e : scene.ego) {
    std::snprintf(line, sizeof(line), "%.9f %.9f %.9f %.9f %.9f\n", e.t, e.x,
                  e.y, e.heading, e.speed);
    out << line;
  }
}

}  // namespace freqlab
