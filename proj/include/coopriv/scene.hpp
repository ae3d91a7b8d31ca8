#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coopriv/geometry.hpp"

namespace coopriv {

struct PointCloud {
  std::vector<Vec3> points;
  /// Either empty or one value in [0, 1] per point.
  std::vector<float> intensity;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct Trajectory {
  std::string vehicle_id;
  double dt{0.1};
  std::vector<Pose> poses;

  double duration() const { return poses.empty() ? 0.0 : dt * static_cast<double>(poses.size() - 1); }
};

struct Scenario {
  std::string scenario_id;
  double duration{0.0};
  double dt{0.1};
  std::vector<Trajectory> trajectories;
  std::string ego_id;
  PointCloud world;
  std::uint64_t rng_seed{0};

  /// Index of the trajectory with the given id, or nullopt.
  std::optional<std::size_t> index_of(const std::string& vehicle_id) const;
  std::size_t ego_index() const;
  std::size_t sample_count() const {
    return trajectories.empty() ? 0 : trajectories.front().poses.size();
  }
};

enum class RoadLayout { straight, grid_intersection, two_lane_highway };

std::string to_string(RoadLayout layout);
RoadLayout road_layout_from_string(const std::string& name);

inline constexpr double kLaneWidth = 3.0;
inline constexpr double kDefaultMaxSpeed = 40.0;
inline constexpr double kMinInitialSeparation = 5.0;

/// Number of uniform samples covering [0, duration] at step dt.
std::size_t sample_count_for(double duration, double dt);

Trajectory constant_velocity_trajectory(const Pose& start, double speed, double duration, double dt,
                                        std::string vehicle_id = {});

/// Deterministic synthetic scenario. Vehicles drive at constant speed along
/// straight lanes of width kLaneWidth; the world is a point sampling of the
/// ground and roadside boxes.
Scenario generate_scenario(RoadLayout layout, int n_vehicles, double duration, double dt,
                           std::uint64_t seed);

/// Reads the `vehicle_id,t,x,y,z,heading` CSV and resamples every vehicle on
/// a common grid over the interval all vehicles share. When `dt` is not given
/// it is taken from the first vehicle's first sampling interval.
Scenario import_trajectories(std::istream& in, std::optional<double> dt = std::nullopt);
Scenario import_trajectories_file(const std::string& path, std::optional<double> dt = std::nullopt);

/// Largest distance between consecutive poses of a trajectory.
double max_step_displacement(const Trajectory& trajectory);

/// Throws InvalidParameter when a scenario violates its structural invariants.
void validate_scenario(const Scenario& scenario, double max_speed = kDefaultMaxSpeed);

}  // namespace coopriv

namespace coopriv {

/// Samples the parallelogram spanned by `edge_u` and `edge_v` from `origin`
/// on a regular grid with the given spacing (edges included).
void append_rectangle(PointCloud& cloud, const Vec3& origin, const Vec3& edge_u, const Vec3& edge_v,
                      double spacing);

/// Samples the four vertical faces and the roof of an axis-aligned box.
void append_box_surface(PointCloud& cloud, const Vec3& lo, const Vec3& hi, double spacing);

}  // namespace coopriv
