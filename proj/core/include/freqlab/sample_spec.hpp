#pragma once

#include <cmath>
#include <vector>

#include "freqlab/errors.hpp"

namespace freqlab {

// Per-sample window geometry. Fixed in absolute time: it never depends on the
// temporal sampling frequency used to select anchors.
struct SampleSpec {
  double history_window = 1.0;  // seconds of ego history before the anchor
  double history_rate = 10.0;   // internal resampling rate, Hz
  std::vector<double> bev_frame_offsets = {-0.5, 0.0};  // seconds, each <= 0
  double horizon = 3.0;         // seconds of future target
  double spacing = 0.5;         // seconds between waypoints

  int num_waypoints() const {
    return static_cast<int>(std::llround(horizon / spacing));
  }
  int num_history_samples() const {
    return static_cast<int>(std::llround(history_window * history_rate)) + 1;
  }

  void validate() const {
    if (history_window <= 0.0) throw ConfigError("history_window must be > 0");
    if (history_rate <= 0.0) throw ConfigError("history_rate must be > 0");
    if (spacing <= 0.0 || horizon <= 0.0)
      throw ConfigError("horizon and spacing must be > 0");
    const double ratio = horizon / spacing;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
      throw ConfigError("horizon must be an integer multiple of spacing");
    bool has_zero = false;
    for (double off : bev_frame_offsets) {
      if (off > 0.0) throw ConfigError("bev_frame_offsets must be <= 0");
      if (off == 0.0) has_zero = true;
    }
    if (!has_zero) throw ConfigError("bev_frame_offsets must include 0");
  }
};

}  // namespace freqlab
