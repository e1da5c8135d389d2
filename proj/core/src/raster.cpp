#include "freqlab/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace freqlab {

namespace {

constexpr double kTimeTol = 1e-9;

struct PixelFrame {
  Pose pose;
  double meters_per_pixel;
  int ego_row, ego_col, size;

  // World point -> (row, col) in continuous pixel coordinates.
  std::array<double, 2> to_pixel(double wx, double wy) const {
    const auto [fx, fy] = world_to_ego(pose, wx, wy);
    // x forward is up (decreasing row); y left is left (decreasing col).
    return {static_cast<double>(ego_row) - fx / meters_per_pixel,
            static_cast<double>(ego_col) - fy / meters_per_pixel};
  }
};

void draw_disc(BevImage& img, int channel, const PixelFrame& frame, double wx,
               double wy, double radius_m) {
  const auto [row, col] = frame.to_pixel(wx, wy);
  const double r = radius_m / frame.meters_per_pixel;
  const int r0 = std::max(0, static_cast<int>(std::floor(row - r)));
  const int r1 = std::min(frame.size - 1, static_cast<int>(std::ceil(row + r)));
  const int c0 = std::max(0, static_cast<int>(std::floor(col - r)));
  const int c1 = std::min(frame.size - 1, static_cast<int>(std::ceil(col + r)));
  for (int y = r0; y <= r1; ++y) {
    for (int x = c0; x <= c1; ++x) {
      const double dy = static_cast<double>(y) - row;
      const double dx = static_cast<double>(x) - col;
      if (dy * dy + dx * dx <= r * r) img.at(channel, y, x) = 1.0;
    }
  }
}

void draw_segment(BevImage& img, int channel, const PixelFrame& frame,
                  const std::array<double, 2>& a,
                  const std::array<double, 2>& b) {
  const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
  const double step = frame.meters_per_pixel * 0.5;
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int i = 0; i <= n; ++i) {
    const double w = static_cast<double>(i) / n;
    const auto [row, col] =
        frame.to_pixel(a[0] + (b[0] - a[0]) * w, a[1] + (b[1] - a[1]) * w);
    const int y = static_cast<int>(std::lround(row));
    const int x = static_cast<int>(std::lround(col));
    if (y >= 0 && y < frame.size && x >= 0 && x < frame.size)
      img.at(channel, y, x) = 1.0;
  }
}

TrajectoryPoint track_state(const std::vector<TrajectoryPoint>& track,
                            const Scene& scene, double t) {
  const double idx =
      std::clamp((t - scene.start_time()) * scene.native_frequency, 0.0,
                 static_cast<double>(track.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(idx));
  const auto hi = std::min(lo + 1, track.size() - 1);
  const double w = idx - static_cast<double>(lo);
  TrajectoryPoint p = track[lo];
  p.x += (track[hi].x - track[lo].x) * w;
  p.y += (track[hi].y - track[lo].y) * w;
  p.t = t;
  return p;
}

}  // namespace

BevImage rasterize_in_frame(const Scene& scene, double content_t,
                            const Pose& frame_pose,
                            const RenderConfig& config) {
  config.validate();
  BevImage img;
  img.channels = kBevChannels;
  img.size = config.image_size;
  img.anchor_t = content_t;
  img.data.assign(
      static_cast<std::size_t>(kBevChannels * img.size * img.size), 0.0);

  const auto anchor = config.anchor_pixel();
  PixelFrame frame{frame_pose, config.meters_per_pixel, anchor[0], anchor[1],
                   config.image_size};

  for (const auto& polyline : scene.map_polylines) {
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i)
      draw_segment(img, kMapChannel, frame, polyline[i], polyline[i + 1]);
  }
  for (const auto& track : scene.agents) {
    const TrajectoryPoint a = track_state(track, scene, content_t);
    draw_disc(img, kAgentChannel, frame, a.x, a.y, config.agent_radius);
  }
  const Pose ego = ego_pose(scene, content_t);
  draw_disc(img, kEgoChannel, frame, ego.x, ego.y, config.ego_radius);
  return img;
}

BevImage rasterize(const Scene& scene, double t, const RenderConfig& config) {
  const double idx = (t - scene.start_time()) * scene.native_frequency;
  if (std::abs(idx - std::round(idx)) > kTimeTol * scene.native_frequency ||
      idx < -0.5 ||
      idx > static_cast<double>(scene.native_timestamps.size()) - 0.5)
    throw AnchorError("rasterize: t is not a native timestamp");
  return rasterize_in_frame(scene, t, ego_pose(scene, t), config);
}

BevImage add_noise(const BevImage& image, const NoiseConfig& noise, Rng& rng) {
  noise.validate();
  if (!noise.enabled) return image;
  BevImage out = image;
  const int dr = static_cast<int>(rng.uniform_int(-noise.jitter_max, noise.jitter_max));
  const int dc = static_cast<int>(rng.uniform_int(-noise.jitter_max, noise.jitter_max));
  if (dr != 0 || dc != 0) {
    std::fill(out.data.begin(), out.data.end(), 0.0);
    for (int c = 0; c < image.channels; ++c) {
      for (int y = 0; y < image.size; ++y) {
        const int sy = y - dr;
        if (sy < 0 || sy >= image.size) continue;
        for (int x = 0; x < image.size; ++x) {
          const int sx = x - dc;
          if (sx < 0 || sx >= image.size) continue;
          out.at(c, y, x) = image.at(c, sy, sx);
        }
      }
    }
  }
  if (noise.background_sigma > 0.0) {
    for (double& v : out.data) v += noise.background_sigma * rng.normal();
  }
  return out;
}

Tensor temporal_stack(const Scene& scene, double t, const SampleSpec& spec,
                      const RenderConfig& render, const NoiseConfig& noise,
                      Rng& rng) {
  spec.validate();
  render.validate();
  noise.validate();

  // One jitter draw shared by all frames of the stack.
  NoiseConfig per_frame = noise;
  per_frame.jitter_max = 0;
  int dr = 0, dc = 0;
  if (noise.enabled && noise.jitter_max > 0) {
    dr = static_cast<int>(rng.uniform_int(-noise.jitter_max, noise.jitter_max));
    dc = static_cast<int>(rng.uniform_int(-noise.jitter_max, noise.jitter_max));
  }

  const int frame_size = kBevChannels * render.image_size * render.image_size;
  Tensor out({static_cast<int>(spec.bev_frame_offsets.size()) * kBevChannels,
              render.image_size, render.image_size});
  int frame_index = 0;
  for (double offset : spec.bev_frame_offsets) {
    const double ft = t + offset;
    if (ft < scene.start_time() - kTimeTol ||
        ft > scene.end_time() + kTimeTol)
      throw ValidityError("temporal_stack: frame offset outside scene span");
    BevImage frame = rasterize_in_frame(scene, ft, ego_pose(scene, ft), render);
    if (noise.enabled && (dr != 0 || dc != 0)) {
      BevImage shifted = frame;
      std::fill(shifted.data.begin(), shifted.data.end(), 0.0);
      for (int c = 0; c < frame.channels; ++c) {
        for (int y = 0; y < frame.size; ++y) {
          const int sy = y - dr;
          if (sy < 0 || sy >= frame.size) continue;
          for (int x = 0; x < frame.size; ++x) {
            const int sx = x - dc;
            if (sx < 0 || sx >= frame.size) continue;
            shifted.at(c, y, x) = frame.at(c, sy, sx);
          }
        }
      }
      frame = std::move(shifted);
    }
    frame = add_noise(frame, per_frame, rng);
    std::copy(frame.data.begin(), frame.data.end(),
              out.data.begin() + static_cast<std::ptrdiff_t>(frame_index) *
                                     frame_size);
    ++frame_index;
  }
  check_finite(out, "temporal_stack");
  return out;
}

void write_bev_text(const BevImage& image, std::ostream& out) {
  static const char* names[kBevChannels] = {"map", "agents", "ego"};
  char buf[32];
  for (int c = 0; c < image.channels; ++c) {
    out << "# channel "
        << (c < kBevChannels ? names[c] : "extra") << " " << image.size << "x"
        << image.size << "\n";
    for (int y = 0; y < image.size; ++y) {
      for (int x = 0; x < image.size; ++x) {
        std::snprintf(buf, sizeof(buf), "%s%.3f", x == 0 ? "" : " ",
                      image.at(c, y, x));
        out << buf;
      }
      out << "\n";
    }
  }
}

}  // namespace freqlab
