#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "coopriv/geometry.hpp"
#include "coopriv/scene.hpp"

namespace coopriv {

struct CameraIntrinsics {
  double fx{100.0};
  double fy{100.0};
  double cx{64.0};
  double cy{64.0};
  int width{128};
  int height{128};

  void validate() const;
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
};

inline constexpr double kNearPlane = 0.1;
inline constexpr double kHole = std::numeric_limits<double>::infinity();

class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height) : width_(width), height_(height), depth_(static_cast<std::size_t>(width) * height, kHole) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return depth_.size(); }

  double at(int u, int v) const { return depth_[index(u, v)]; }
  double& at(int u, int v) { return depth_[index(u, v)]; }
  double operator[](std::size_t i) const { return depth_[i]; }
  double& operator[](std::size_t i) { return depth_[i]; }

  static bool is_hole(double d) { return !(d < kHole); }
  bool hole(int u, int v) const { return is_hole(at(u, v)); }

  std::size_t hole_count() const;
  double hole_fraction() const;

  const std::vector<double>& values() const { return depth_; }

  friend bool operator==(const DepthMap&, const DepthMap&) = default;

 private:
  std::size_t index(int u, int v) const { return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(u); }

  int width_{0};
  int height_{0};
  std::vector<double> depth_;
};

struct Projection {
  double u{0.0};
  double v{0.0};
  double depth{0.0};
};

/// Camera-frame coordinates (x right, y down, z along the heading) of a world
/// point seen from a camera-to-world pose.
Vec3 world_to_camera(const Pose& camera_pose, const Vec3& point);
Vec3 camera_to_world(const Pose& camera_pose, const Vec3& camera_point);

/// Pinhole projection; nullopt when the point is behind the near plane or
/// falls outside the image.
std::optional<Projection> project_point(const CameraIntrinsics& intrinsics, const Pose& camera_pose,
                                        const Vec3& point);

/// Inverse of project_point for a continuous pixel coordinate and depth.
Vec3 back_project(const CameraIntrinsics& intrinsics, const Pose& camera_pose, double u, double v,
                  double depth);

struct RenderReport {
  DepthMap depth;
  double hole_fraction{1.0};
  std::size_t points_rendered{0};
};

/// Z-buffer splatting with 1-pixel footprints; nearest depth wins.
/// Serial reference implementation.
RenderReport render_depth_serial(const CameraIntrinsics& intrinsics, const Pose& pose, const PointCloud& cloud);

/// OpenMP kernel: per-thread z-buffers merged by a per-pixel minimum.
/// Produces exactly the serial result. `threads <= 0` uses the OpenMP default.
RenderReport render_depth(const CameraIntrinsics& intrinsics, const Pose& pose, const PointCloud& cloud,
                          int threads = 0);

struct DepthView {
  Pose pose;
  DepthMap depth;
};

/// Back-projects every non-hole pixel (at its centre) of each view into the
/// world frame and concatenates the results. No deduplication.
PointCloud fuse_frames(const std::vector<DepthView>& views, const CameraIntrinsics& intrinsics);

/// Union of already world-framed clouds.
PointCloud fuse_clouds(const std::vector<PointCloud>& clouds);

struct ContextRow {
  std::size_t context_length{0};
  double novel_offset{0.0};
  double hole_fraction{1.0};
  std::size_t points_rendered{0};
};

/// Novel viewpoint: `pose` displaced by `offset` metres to its left.
Pose lateral_offset(const Pose& pose, double offset);

/// For each context length k, renders the world from the last k true poses,
/// fuses the resulting depth maps and re-renders the fused cloud from the last
/// pose displaced laterally by `novel_offset`.
std::vector<ContextRow> hole_fraction_vs_context(const PointCloud& world, const std::vector<Pose>& trajectory,
                                                 double novel_offset, const std::vector<std::size_t>& context_lengths,
                                                 const CameraIntrinsics& intrinsics, int threads = 0);

/// Turns exactly round(mask_fraction * non_hole_count) uniformly chosen
/// non-hole pixels into holes.
DepthMap apply_random_mask(const DepthMap& depth, double mask_fraction, std::uint64_t seed);

struct DepthGain {
  double coverage_without{0.0};
  double coverage_with{0.0};
  double mean_abs_depth_error{0.0};
  std::size_t gained_pixels{0};
};

/// Coverage of the ego view from the ego's own single frame versus the ego
/// frame plus a contributor's cloud. The ego's sensor sees `world` through
/// `occluders` (e.g. a truck ahead); occluder returns are not scene
/// measurements and are dropped. Depth error on gained pixels is measured
/// against the render of `world` alone.
DepthGain cooperative_depth_gain(const Pose& ego_pose, const CameraIntrinsics& intrinsics,
                                 const PointCloud& contributor_cloud, const PointCloud& world,
                                 const PointCloud& occluders = {});

/// The corridor used for context studies: floor, ceiling, side walls, an end
/// wall and a row of pillars, sampled every `spacing` metres. The corridor
/// runs along +x from x = 0 to `length`, y in [-half_width, half_width].
PointCloud corridor_scene(double length = 60.0, double half_width = 4.0, double height = 4.0,
                          double spacing = 0.05);

/// Camera poses along the corridor centreline, heading +x, `step` metres apart.
std::vector<Pose> corridor_trajectory(std::size_t frames, double step = 0.5, double start_x = 2.0,
                                      double camera_height = 1.5);

/// ASCII grid export: header `P2-depth <width> <height>` followed by one row
/// per image line, holes written as -1.
void write_depth_grid(std::ostream& out, const DepthMap& depth);
std::string context_csv_header();
std::string context_csv_row(const ContextRow& row);

}  // namespace coopriv
