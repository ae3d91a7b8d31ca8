#include "coopriv/nvs.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "coopriv/error.hpp"
#include "coopriv/format.hpp"
#include "coopriv/random.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace coopriv {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy))
    throw InvalidParameter("CameraIntrinsics: fx and fy must be positive");
  if (width <= 0 || height <= 0) throw InvalidParameter("CameraIntrinsics: width and height must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    throw InvalidParameter("CameraIntrinsics: principal point must lie inside the image");
}

std::size_t DepthMap::hole_count() const {
  return static_cast<std::size_t>(std::count_if(depth_.begin(), depth_.end(), [](double d) { return is_hole(d); }));
}

double DepthMap::hole_fraction() const {
  if (depth_.empty()) return 1.0;
  return static_cast<double>(hole_count()) / static_cast<double>(depth_.size());
}

namespace {
struct Axes {
  Vec3 right;
  Vec3 down;
  Vec3 forward;
};

Axes camera_axes(double heading) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return {{s, -c, 0.0}, {0.0, 0.0, -1.0}, {c, s, 0.0}};
}
}  // namespace

Vec3 world_to_camera(const Pose& camera_pose, const Vec3& point) {
  const Axes axes = camera_axes(camera_pose.heading);
  const Vec3 d = point - camera_pose.position();
  return {dot(d, axes.right), dot(d, axes.down), dot(d, axes.forward)};
}

Vec3 camera_to_world(const Pose& camera_pose, const Vec3& p) {
  const Axes axes = camera_axes(camera_pose.heading);
  return camera_pose.position() + p.x * axes.right + p.y * axes.down + p.z * axes.forward;
}

std::optional<Projection> project_point(const CameraIntrinsics& k, const Pose& camera_pose, const Vec3& point) {
  const Vec3 c = world_to_camera(camera_pose, point);
  if (!(c.z > kNearPlane)) return std::nullopt;
  const double u = k.fx * (c.x / c.z) + k.cx;
  const double v = k.fy * (c.y / c.z) + k.cy;
  if (!(u >= 0.0 && u < k.width && v >= 0.0 && v < k.height)) return std::nullopt;
  return Projection{u, v, c.z};
}

Vec3 back_project(const CameraIntrinsics& k, const Pose& camera_pose, double u, double v, double depth) {
  const Vec3 c{(u - k.cx) / k.fx * depth, (v - k.cy) / k.fy * depth, depth};
  return camera_to_world(camera_pose, c);
}

namespace {

// Splats points [first, last) into `zbuf`; returns the number that landed.
std::size_t splat(const CameraIntrinsics& k, const Pose& pose, const std::vector<Vec3>& points, std::size_t first,
                  std::size_t last, std::vector<double>& zbuf) {
  const Axes axes = camera_axes(pose.heading);
  const Vec3 origin = pose.position();
  std::size_t rendered = 0;
  for (std::size_t i = first; i < last; ++i) {
    const Vec3 d = points[i] - origin;
    const double z = dot(d, axes.forward);
    if (!(z > kNearPlane)) continue;
    const double u = k.fx * (dot(d, axes.right) / z) + k.cx;
    const double v = k.fy * (dot(d, axes.down) / z) + k.cy;
    if (!(u >= 0.0 && u < k.width && v >= 0.0 && v < k.height)) continue;
    const auto px = static_cast<std::size_t>(v) * static_cast<std::size_t>(k.width) + static_cast<std::size_t>(u);
    zbuf[px] = std::min(zbuf[px], z);
    ++rendered;
  }
  return rendered;
}

RenderReport make_report(const CameraIntrinsics& k, std::vector<double>&& zbuf, std::size_t rendered) {
  RenderReport report;
  report.depth = DepthMap(k.width, k.height);
  for (std::size_t i = 0; i < zbuf.size(); ++i) report.depth[i] = zbuf[i];
  report.hole_fraction = report.depth.hole_fraction();
  report.points_rendered = rendered;
  return report;
}

}  // namespace

RenderReport render_depth_serial(const CameraIntrinsics& intrinsics, const Pose& pose, const PointCloud& cloud) {
  intrinsics.validate();
  std::vector<double> zbuf(intrinsics.pixel_count(), kHole);
  const std::size_t rendered = splat(intrinsics, pose, cloud.points, 0, cloud.points.size(), zbuf);
  return make_report(intrinsics, std::move(zbuf), rendered);
}

RenderReport render_depth(const CameraIntrinsics& intrinsics, const Pose& pose, const PointCloud& cloud,
                          int threads) {
  intrinsics.validate();
  const std::size_t n_pixels = intrinsics.pixel_count();
  std::vector<double> zbuf(n_pixels, kHole);
  std::size_t rendered = 0;
#ifdef _OPENMP
  const int n_threads = threads > 0 ? threads : omp_get_max_threads();
  if (n_threads <= 1 || cloud.points.size() < 4096) {
    rendered = splat(intrinsics, pose, cloud.points, 0, cloud.points.size(), zbuf);
    return make_report(intrinsics, std::move(zbuf), rendered);
  }
#pragma omp parallel num_threads(n_threads) reduction(+ : rendered)
  {
    const auto team = static_cast<std::size_t>(omp_get_num_threads());
    const auto id = static_cast<std::size_t>(omp_get_thread_num());
    const std::size_t n = cloud.points.size();
    const std::size_t first = n * id / team;
    const std::size_t last = n * (id + 1) / team;
    std::vector<double> local(n_pixels, kHole);
    rendered += splat(intrinsics, pose, cloud.points, first, last, local);
    // Minimum is order independent, so the merge matches the serial pass bit for bit.
#pragma omp critical(coopriv_zbuffer_merge)
    for (std::size_t p = 0; p < n_pixels; ++p) zbuf[p] = std::min(zbuf[p], local[p]);
  }
#else
  (void)threads;
  rendered = splat(intrinsics, pose, cloud.points, 0, cloud.points.size(), zbuf);
#endif
  return make_report(intrinsics, std::move(zbuf), rendered);
}

PointCloud fuse_frames(const std::vector<DepthView>& views, const CameraIntrinsics& intrinsics) {
  intrinsics.validate();
  if (views.empty()) throw InvalidParameter("fuse_frames needs at least one view");
  PointCloud cloud;
  for (const auto& view : views) {
    if (view.depth.width() != intrinsics.width || view.depth.height() != intrinsics.height)
      throw InvalidParameter("depth map size does not match the intrinsics");
    for (int v = 0; v < view.depth.height(); ++v) {
      for (int u = 0; u < view.depth.width(); ++u) {
        const double d = view.depth.at(u, v);
        if (DepthMap::is_hole(d)) continue;
        cloud.points.push_back(back_project(intrinsics, view.pose, u + 0.5, v + 0.5, d));
      }
    }
  }
  return cloud;
}

PointCloud fuse_clouds(const std::vector<PointCloud>& clouds) {
  PointCloud out;
  for (const auto& c : clouds) out.points.insert(out.points.end(), c.points.begin(), c.points.end());
  return out;
}

Pose lateral_offset(const Pose& pose, double offset) {
  Pose p = pose;
  p.x += -std::sin(pose.heading) * offset;
  p.y += std::cos(pose.heading) * offset;
  return p;
}

std::vector<ContextRow> hole_fraction_vs_context(const PointCloud& world, const std::vector<Pose>& trajectory,
                                                 double novel_offset, const std::vector<std::size_t>& context_lengths,
                                                 const CameraIntrinsics& intrinsics, int threads) {
  intrinsics.validate();
  if (trajectory.empty()) throw InvalidParameter("trajectory must not be empty");
  if (!std::is_sorted(context_lengths.begin(), context_lengths.end()))
    throw InvalidParameter("context lengths must be sorted ascending");
  for (std::size_t k : context_lengths) {
    if (k < 1 || k > trajectory.size())
      throw InvalidParameter("context length " + std::to_string(k) + " outside [1, trajectory length]");
  }
  const Pose novel = lateral_offset(trajectory.back(), novel_offset);

  // Sensor frames are rendered once and shared by every context length.
  const std::size_t longest = context_lengths.empty() ? 0 : context_lengths.back();
  std::vector<DepthView> views;
  for (std::size_t i = 0; i < longest; ++i) {
    const Pose& pose = trajectory[trajectory.size() - 1 - i];
    views.push_back({pose, render_depth(intrinsics, pose, world, threads).depth});
  }

  std::vector<ContextRow> rows;
  for (std::size_t k : context_lengths) {
    const std::vector<DepthView> context(views.begin(), views.begin() + static_cast<std::ptrdiff_t>(k));
    const PointCloud fused = fuse_frames(context, intrinsics);
    const RenderReport report = render_depth(intrinsics, novel, fused, threads);
    rows.push_back({k, novel_offset, report.hole_fraction, report.points_rendered});
  }
  return rows;
}

DepthMap apply_random_mask(const DepthMap& depth, double mask_fraction, std::uint64_t seed) {
  if (!(mask_fraction >= 0.0 && mask_fraction <= 1.0)) throw InvalidParameter("mask_fraction must be in [0, 1]");
  std::vector<std::size_t> filled;
  for (std::size_t i = 0; i < depth.size(); ++i)
    if (!DepthMap::is_hole(depth[i])) filled.push_back(i);
  const auto count = static_cast<std::size_t>(std::llround(mask_fraction * static_cast<double>(filled.size())));
  std::vector<std::size_t> chosen;
  chosen.reserve(count);
  SplitMix64 rng(derive_seed(seed, 0x3a5cULL));
  std::sample(filled.begin(), filled.end(), std::back_inserter(chosen), count, rng);
  DepthMap out = depth;
  for (std::size_t i : chosen) out[i] = kHole;
  return out;
}

DepthGain cooperative_depth_gain(const Pose& ego_pose, const CameraIntrinsics& intrinsics,
                                 const PointCloud& contributor_cloud, const PointCloud& world,
                                 const PointCloud& occluders) {
  const RenderReport truth = render_depth(intrinsics, ego_pose, world);
  const RenderReport blocked = render_depth(intrinsics, ego_pose, occluders);

  DepthMap own(intrinsics.width, intrinsics.height);
  for (std::size_t i = 0; i < own.size(); ++i)
    if (truth.depth[i] < blocked.depth[i]) own[i] = truth.depth[i];
  const PointCloud ego_cloud = fuse_frames({{ego_pose, own}}, intrinsics);

  const RenderReport without = render_depth(intrinsics, ego_pose, ego_cloud);
  const RenderReport with = render_depth(intrinsics, ego_pose, fuse_clouds({ego_cloud, contributor_cloud}));

  DepthGain gain;
  gain.coverage_without = 1.0 - without.hole_fraction;
  gain.coverage_with = 1.0 - with.hole_fraction;
  double error_sum = 0.0;
  std::size_t scored = 0;
  for (std::size_t i = 0; i < own.size(); ++i) {
    if (!DepthMap::is_hole(without.depth[i]) || DepthMap::is_hole(with.depth[i])) continue;
    ++gain.gained_pixels;
    if (DepthMap::is_hole(truth.depth[i])) continue;
    error_sum += std::abs(with.depth[i] - truth.depth[i]);
    ++scored;
  }
  gain.mean_abs_depth_error = scored == 0 ? 0.0 : error_sum / static_cast<double>(scored);
  return gain;
}

PointCloud corridor_scene(double length, double half_width, double height, double spacing) {
  PointCloud cloud;
  append_rectangle(cloud, {0, -half_width, 0}, {length, 0, 0}, {0, 2 * half_width, 0}, spacing);       // floor
  append_rectangle(cloud, {0, -half_width, height}, {length, 0, 0}, {0, 2 * half_width, 0}, spacing);  // ceiling
  append_rectangle(cloud, {0, -half_width, 0}, {length, 0, 0}, {0, 0, height}, spacing);               // right wall
  append_rectangle(cloud, {0, half_width, 0}, {length, 0, 0}, {0, 0, height}, spacing);                // left wall
  append_rectangle(cloud, {length, -half_width, 0}, {0, 2 * half_width, 0}, {0, 0, height}, spacing);  // end wall
  for (double x = 6.0; x + 0.5 < length; x += 6.0) {
    for (double y : {-half_width / 2, half_width / 2}) {
      append_box_surface(cloud, {x, y - 0.25, 0}, {x + 0.5, y + 0.25, height}, spacing);
    }
  }
  return cloud;
}

std::vector<Pose> corridor_trajectory(std::size_t frames, double step, double start_x, double camera_height) {
  std::vector<Pose> poses;
  for (std::size_t i = 0; i < frames; ++i) poses.push_back({start_x + step * static_cast<double>(i), 0.0, camera_height, 0.0});
  return poses;
}

void write_depth_grid(std::ostream& out, const DepthMap& depth) {
  out << "P2-depth " << depth.width() << ' ' << depth.height() << '\n';
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      if (u) out << ' ';
      const double d = depth.at(u, v);
      out << (DepthMap::is_hole(d) ? std::string("-1") : format_number(d));
    }
    out << '\n';
  }
}

std::string context_csv_header() { return "context_length,novel_offset,hole_fraction,points_rendered"; }

std::string context_csv_row(const ContextRow& row) {
  return std::to_string(row.context_length) + "," + format_number(row.novel_offset) + "," +
         format_number(row.hole_fraction) + "," + std::to_string(row.points_rendered);
}

}  // namespace coopriv
