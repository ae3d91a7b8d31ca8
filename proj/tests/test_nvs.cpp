#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "coopriv/error.hpp"
#include "coopriv/nvs.hpp"
#include "oracles.hpp"

using namespace coopriv;

namespace {

const CameraIntrinsics kCam{100.0, 100.0, 64.0, 64.0, 128, 128};

// Wall facing a camera at the origin looking along +x, sampled on a grid.
PointCloud wall(double x, double half_extent, double spacing) {
  PointCloud c;
  append_rectangle(c, {x, -half_extent, -half_extent}, {0, 2 * half_extent, 0}, {0, 0, 2 * half_extent}, spacing);
  return c;
}

std::size_t covered(const DepthMap& d) { return d.size() - d.hole_count(); }

}  // namespace

TEST_SUITE("nvs") {

TEST_CASE("projection examples") {
  const Pose cam{};
  auto p = project_point(kCam, cam, {5, 0, 0});
  REQUIRE(p);
  CHECK(p->u == 64.0);
  CHECK(p->v == 64.0);
  CHECK(p->depth == 5.0);
  CHECK_FALSE(project_point(kCam, cam, {-5, 0, 0}));
  CHECK_FALSE(project_point(kCam, cam, {0.05, 0, 0}));
  // 1 m to the right of the axis (right is -y when looking along +x).
  p = project_point(kCam, cam, {5, -1, 0});
  REQUIRE(p);
  CHECK(p->u == doctest::Approx(84.0));
  // Above the axis lands at smaller v (image y points down).
  p = project_point(kCam, cam, {5, 0, 1});
  REQUIRE(p);
  CHECK(p->v == doctest::Approx(44.0));
  CHECK_FALSE(project_point(kCam, cam, {5, -10, 0}));
}

TEST_CASE("intrinsics validation") {
  CHECK_THROWS_AS((CameraIntrinsics{0, 1, 1, 1, 4, 4}.validate()), InvalidParameter);
  CHECK_THROWS_AS((CameraIntrinsics{1, 1, 4, 1, 4, 4}.validate()), InvalidParameter);
  CHECK_NOTHROW(kCam.validate());
}

TEST_CASE("projection inverse to 1e-9 m on random points") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-50, 50), ang(-std::numbers::pi, std::numbers::pi);
  int checked = 0;
  while (checked < 10000) {
    const Pose cam = make_pose(coord(rng), coord(rng), coord(rng) * 0.05, ang(rng));
    const Vec3 p{coord(rng), coord(rng), coord(rng) * 0.2};
    const auto proj = project_point(kCam, cam, p);
    if (!proj) continue;
    const Vec3 back = back_project(kCam, cam, proj->u, proj->v, proj->depth);
    CHECK(distance(back, p) <= 1e-9);
    ++checked;
  }
}

TEST_CASE("camera frame transform roundtrip") {
  const Pose cam = make_pose(3, -2, 1.5, 2.2);
  const Vec3 p{10, 4, -1};
  CHECK(distance(camera_to_world(cam, world_to_camera(cam, p)), p) < 1e-12);
}

TEST_CASE("render: empty cloud and z-buffer basics") {
  const RenderReport empty = render_depth(kCam, {}, {});
  CHECK(empty.hole_fraction == 1.0);
  CHECK(empty.points_rendered == 0);

  PointCloud two;
  two.points = {{7, 0, 0}, {3, 0, 0}};
  const RenderReport r = render_depth(kCam, {}, two);
  CHECK(r.depth.at(64, 64) == 3.0);
  CHECK(r.points_rendered == 2);
  CHECK(r.depth.hole_count() == r.depth.size() - 1);
  CHECK(r.hole_fraction == doctest::Approx(static_cast<double>(r.depth.size() - 1) / r.depth.size()));
}

TEST_CASE("z-buffer equals a per-pixel brute-force scan") {
  const CameraIntrinsics small{20, 20, 16, 12, 32, 24};
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> x(0.5, 12), yz(-6, 6);
  for (int trial = 0; trial < 20; ++trial) {
    PointCloud c;
    for (int i = 0; i < 600; ++i) c.points.push_back({x(rng), yz(rng), yz(rng)});
    // Duplicate depths onto shared pixels to exercise ties.
    for (int i = 0; i < 50; ++i) c.points.push_back(c.points[static_cast<std::size_t>(i)]);
    const Pose pose = make_pose(0, 0, 0, 0.2 * (trial % 5) - 0.4);
    const DepthMap ref = oracle::brute_force_zbuffer(small, pose, c);
    CHECK(render_depth_serial(small, pose, c).depth == ref);
    CHECK(render_depth(small, pose, c, 4).depth == ref);
  }
}

TEST_CASE("OpenMP render equals the serial reference") {
  const PointCloud world = corridor_scene(60, 4, 4, 0.05);
  for (const auto& pose : corridor_trajectory(4, 2.0)) {
    const RenderReport s = render_depth_serial(kCam, pose, world);
    for (int threads : {1, 2, 4, 7}) {
      const RenderReport p = render_depth(kCam, pose, world, threads);
      CHECK(p.depth == s.depth);
      CHECK(p.points_rendered == s.points_rendered);
      CHECK(p.hole_fraction == s.hole_fraction);
    }
  }
}

TEST_CASE("dense wall filling the frustum leaves almost no holes") {
  // At 5 m the 128 px image spans 6.4 m; 0.02 m spacing is 0.4 px, i.e.
  // more than 4 samples per pixel.
  const RenderReport r = render_depth(kCam, {}, wall(5.0, 3.5, 0.02));
  CHECK(r.hole_fraction <= 0.05);
}

TEST_CASE("fuse_frames counts and the self-render inverse") {
  const PointCloud world = corridor_scene(30, 4, 4, 0.05);
  const Pose pose = corridor_trajectory(1).front();
  const DepthMap d = render_depth(kCam, pose, world).depth;
  const PointCloud fused = fuse_frames({{pose, d}}, kCam);
  CHECK(fused.size() == covered(d));
  const DepthMap again = render_depth(kCam, pose, fused).depth;
  for (int v = 0; v < d.height(); ++v)
    for (int u = 0; u < d.width(); ++u) {
      if (d.hole(u, v)) continue;
      REQUIRE_FALSE(again.hole(u, v));
      CHECK(std::abs(again.at(u, v) - d.at(u, v)) <= 1e-6);
    }
}

TEST_CASE("two views 2 m apart cover the union of their wall footprints") {
  const PointCloud w = wall(8.0, 10.0, 0.02);
  const Pose a{}, b = make_pose(0, 2, 0, 0);
  const auto da = render_depth(kCam, a, w).depth, db = render_depth(kCam, b, w).depth;
  const PointCloud fused = fuse_frames({{a, da}, {b, db}}, kCam);
  CHECK(fused.size() == covered(da) + covered(db));
  // Footprint geometry: each view sees y in [pose.y - 8*64/100, pose.y + 8*63/100].
  double lo = 1e9, hi = -1e9;
  for (const auto& p : fused.points) {
    lo = std::min(lo, p.y);
    hi = std::max(hi, p.y);
  }
  CHECK(lo == doctest::Approx(0.0 - 8.0 * 64 / 100).epsilon(0.01));
  CHECK(hi == doctest::Approx(2.0 + 8.0 * 64 / 100).epsilon(0.01));
}

TEST_CASE("hole fraction vs context: zero offset reproduces the self-render") {
  const PointCloud world = corridor_scene(60, 4, 4, 0.025);
  const auto traj = corridor_trajectory(8);
  const CameraIntrinsics cam{64, 64, 64, 48, 128, 96};
  const auto rows = hole_fraction_vs_context(world, traj, 0.0, {1}, cam);
  const double self = render_depth(cam, traj.back(), world).hole_fraction;
  CHECK(rows[0].hole_fraction == doctest::Approx(self).epsilon(1e-12));
  CHECK(self < 0.01);
}

TEST_CASE("hole fraction vs context: monotone trend across corridor variants") {
  const CameraIntrinsics cam{64, 64, 64, 48, 128, 96};
  for (double spacing : {0.025, 0.03, 0.04}) {
    const PointCloud world = corridor_scene(60, 4, 4, spacing);
    const auto rows = hole_fraction_vs_context(world, corridor_trajectory(8), 2.0, {1, 2, 4, 8}, cam);
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].hole_fraction <= rows[i - 1].hole_fraction + 0.01);
    CHECK(rows.back().hole_fraction <= rows.front().hole_fraction);
  }
}

TEST_CASE("adding context frames never uncovers a novel-view pixel") {
  const CameraIntrinsics cam{64, 64, 64, 48, 128, 96};
  const PointCloud world = corridor_scene(60, 4, 4, 0.04);
  const auto traj = corridor_trajectory(6);
  const Pose novel = lateral_offset(traj.back(), 2.0);
  std::vector<DepthView> views;
  DepthMap previous(cam.width, cam.height);
  for (std::size_t k = 1; k <= traj.size(); ++k) {
    const Pose& p = traj[traj.size() - k];
    views.push_back({p, render_depth(cam, p, world).depth});
    const DepthMap now = render_depth(cam, novel, fuse_frames(views, cam)).depth;
    for (std::size_t i = 0; i < now.size(); ++i)
      if (!DepthMap::is_hole(previous[i])) CHECK_FALSE(DepthMap::is_hole(now[i]));
    previous = now;
  }
}

TEST_CASE("lateral offset moves to the left of the heading") {
  const Pose p = lateral_offset(make_pose(1, 1, 0, 0), 2.0);
  CHECK(p.x == doctest::Approx(1.0));
  CHECK(p.y == doctest::Approx(3.0));
  const Pose q = lateral_offset(make_pose(0, 0, 0, std::numbers::pi / 2), 2.0);
  CHECK(q.x == doctest::Approx(-2.0));
}

TEST_CASE("random mask: exact counts and determinism") {
  DepthMap d(50, 40);
  for (int i = 0; i < 1000; ++i) d[static_cast<std::size_t>(i) * 2] = 1.0 + i;
  REQUIRE(covered(d) == 1000);
  CHECK(apply_random_mask(d, 0.0, 1) == d);
  CHECK(apply_random_mask(d, 1.0, 1).hole_count() == d.size());
  const DepthMap m = apply_random_mask(d, 0.3, 5);
  CHECK(m.hole_count() - d.hole_count() == 300);
  for (std::size_t i = 0; i < d.size(); ++i)
    if (!m.is_hole(m[i])) CHECK(m[i] == d[i]);
  CHECK(apply_random_mask(d, 0.3, 5) == m);
  CHECK_FALSE(apply_random_mask(d, 0.3, 6) == m);
  CHECK_THROWS_AS(apply_random_mask(d, 1.5, 1), InvalidParameter);
}

TEST_CASE("cooperative depth gain") {
  const CameraIntrinsics cam{64, 64, 64, 48, 128, 96};
  // Fronto-parallel wall: every point in a pixel has the same depth, so a
  // subsample of it reproduces the dense depth exactly.
  const PointCloud world = wall(20.0, 12.0, 0.05);
  const Pose ego = make_pose(0, 0, 0, 0);

  SUBCASE("empty contributor changes nothing") {
    const DepthGain g = cooperative_depth_gain(ego, cam, {}, world);
    CHECK(g.coverage_with == g.coverage_without);
    CHECK(g.gained_pixels == 0);
  }
  SUBCASE("contributor behind an occluding box fills the shadow exactly") {
    PointCloud truck;
    append_box_surface(truck, {6, -2, -1.5}, {9, 2, 2}, 0.05);
    // The contributor drives beside the truck; its cloud is a subsample of the world.
    PointCloud contributor;
    for (std::size_t i = 0; i < world.size(); i += 2) contributor.points.push_back(world.points[i]);
    const DepthGain g = cooperative_depth_gain(ego, cam, contributor, world, truck);
    CHECK(g.coverage_with > g.coverage_without);
    CHECK(g.gained_pixels > 0);
    CHECK(g.mean_abs_depth_error <= 1e-6);
  }
}

TEST_CASE("depth grid export") {
  DepthMap d(3, 2);
  d.at(1, 0) = 2.5;
  std::ostringstream out;
  write_depth_grid(out, d);
  CHECK(out.str() == "P2-depth 3 2\n-1 2.5 -1\n-1 -1 -1\n");
  CHECK(context_csv_header() == "context_length,novel_offset,hole_fraction,points_rendered");
}

}  // TEST_SUITE
