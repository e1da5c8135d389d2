#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <vector>

#include "freqlab/tensor.hpp"
#include "freqlab/world.hpp"

namespace freqlab {

// Occupancy planes of a BEV frame, in channel order.
inline constexpr int kBevChannels = 3;  // {map, agents, ego}
inline constexpr int kMapChannel = 0;
inline constexpr int kAgentChannel = 1;
inline constexpr int kEgoChannel = 2;

struct RenderConfig {
  int image_size = 32;           // pixels per side
  double meters_per_pixel = 1.0;
  // (row, col) of the ego pose; negative means "use the default", which is
  // three quarters down the image and horizontally centered.
  std::array<int, 2> ego_anchor_pixel = {-1, -1};
  double agent_radius = 1.0;  // meters, footprint disc
  double ego_radius = 1.0;    // meters, ego marker disc

  std::array<int, 2> anchor_pixel() const {
    if (ego_anchor_pixel[0] >= 0 && ego_anchor_pixel[1] >= 0)
      return ego_anchor_pixel;
    return {3 * image_size / 4, image_size / 2};
  }
  void validate() const {
    if (image_size <= 0) throw ConfigError("image_size must be > 0");
    if (meters_per_pixel <= 0.0)
      throw ConfigError("meters_per_pixel must be > 0");
  }
};

struct NoiseConfig {
  double background_sigma = 0.5;  // additive per-pixel noise, intensity units
  int jitter_max = 2;             // global translation bound, pixels
  bool enabled = true;

  void validate() const {
    if (background_sigma < 0.0)
      throw ConfigError("background_sigma must be >= 0");
    if (jitter_max < 0) throw ConfigError("jitter_max must be >= 0");
  }
};

struct BevImage {
  int channels = 0;
  int size = 0;
  std::vector<double> data;  // channels x size x size, row-major
  double anchor_t = 0.0;

  double& at(int c, int row, int col) {
    return data[static_cast<std::size_t>((c * size + row) * size + col)];
  }
  double at(int c, int row, int col) const {
    return data[static_cast<std::size_t>((c * size + row) * size + col)];
  }
};

// Ego-centric raster at time t: ego at the anchor pixel, heading up, hard 0/1
// occupancy before noise.
BevImage rasterize(const Scene& scene, double t, const RenderConfig& config);

// Renders scene content as of content_t but in the given ego frame.
BevImage rasterize_in_frame(const Scene& scene, double content_t,
                            const Pose& frame, const RenderConfig& config);

// Global integer jitter (one draw, zero-fill at edges) plus i.i.d. Gaussian
// background noise. The input image is left unchanged.
BevImage add_noise(const BevImage& image, const NoiseConfig& noise, Rng& rng);

// One frame per spec.bev_frame_offsets entry, each rendered in the ego frame
// at its own timestamp t + offset, noised, and concatenated channel-wise in
// offset order. Static map content therefore shifts between frames by the ego
// displacement, which is what encodes ego motion in the stack. The jitter draw
// is shared across frames; background noise is per frame.
Tensor temporal_stack(const Scene& scene, double t, const SampleSpec& spec,
                      const RenderConfig& render, const NoiseConfig& noise,
                      Rng& rng);

// Debug dump: one text grid per channel, portable-graymap style.
void write_bev_text(const BevImage& image, std::ostream& out);

}  // namespace freqlab
