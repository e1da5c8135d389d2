#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "freqlab/sample_spec.hpp"

namespace freqlab {

struct TrajectoryPoint {
  double t = 0.0;        // seconds
  double x = 0.0;        // meters
  double y = 0.0;        // meters
  double heading = 0.0;  // radians, wrapped to [-pi, pi)
  double speed = 0.0;    // m/s, >= 0
};

struct Scene {
  std::string scene_id;
  double native_frequency = 0.0;  // Hz
  std::vector<double> native_timestamps;
  std::vector<TrajectoryPoint> ego;  // aligned to native_timestamps
  std::vector<std::vector<TrajectoryPoint>> agents;
  std::vector<std::vector<std::array<double, 2>>> map_polylines;

  double start_time() const { return native_timestamps.front(); }
  double end_time() const { return native_timestamps.back(); }
};

enum class Role { train, validation };

struct SceneSet {
  std::vector<Scene> scenes;
  Role role = Role::train;
};

struct WorldConfig {
  int num_scenes = 1;
  double scene_duration = 20.0;    // seconds
  double native_frequency = 10.0;  // Hz
  std::pair<double, double> speed_range = {5.0, 15.0};      // m/s
  std::pair<double, double> curvature_range = {-0.05, 0.05};  // 1/m
  std::pair<int, int> num_agents_range = {2, 6};
  int map_density = 6;  // polylines per scene
  std::uint64_t seed = 0;

  void validate() const;
};

enum class Command { left, straight, right };
const char* command_name(Command c);

// Ego-frame ego history: fixed-length, resampled at spec.history_rate,
// independent of the training frequency. Each row is
// (relative_t, x, y, heading, speed) with the last row at relative_t = 0.
struct EgoHistory {
  std::vector<std::array<double, 5>> samples;
};

struct Waypoints {
  std::vector<std::array<double, 2>> points;  // ego-frame (x, y), meters
  double spacing = 0.0;                       // seconds
  double horizon = 0.0;                       // seconds
};

struct SceneStats {
  double mean_speed = 0.0;              // m/s
  double displacement_per_frame = 0.0;  // meters between selected frames
  std::size_t sample_count = 0;
};

// Ego pose at time t (interpolating native samples when t is off-grid).
struct Pose {
  double x = 0.0, y = 0.0, heading = 0.0;
};
Pose ego_pose(const Scene& scene, double t);
// Maps a world point into the ego frame of `pose` (x forward, y left).
std::array<double, 2> world_to_ego(const Pose& pose, double wx, double wy);

Scene generate_scene(std::uint64_t seed, const WorldConfig& config);
// Scenes i get per-scene seeds derived from (config.seed, role, i).
SceneSet generate_scene_set(const WorldConfig& config, Role role);

EgoHistory ego_history(const Scene& scene, double t, const SampleSpec& spec);
Waypoints future_target(const Scene& scene, double t, const SampleSpec& spec);

// Navigation command from net heading change over the future horizon:
// left if > +15 deg, right if < -15 deg, else straight.
Command command_for(const Scene& scene, double t, const SampleSpec& spec);

SceneStats scene_stats(const SceneSet& set, double frequency);

// Debug dump: one timestamped ego state per line.
void write_scene_text(const Scene& scene, std::ostream& out);

double wrap_angle(double a);

}  // namespace freqlab
