#include "coopriv/scene.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "coopriv/error.hpp"
#include "coopriv/random.hpp"

namespace coopriv {

std::optional<std::size_t> Scenario::index_of(const std::string& vehicle_id) const {
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    if (trajectories[i].vehicle_id == vehicle_id) return i;
  }
  return std::nullopt;
}

std::size_t Scenario::ego_index() const {
  auto idx = index_of(ego_id);
  if (!idx) throw InvalidParameter("ego '" + ego_id + "' is not among the scenario's vehicles");
  return *idx;
}

std::string to_string(RoadLayout layout) {
  switch (layout) {
    case RoadLayout::straight: return "straight";
    case RoadLayout::grid_intersection: return "grid-intersection";
    case RoadLayout::two_lane_highway: return "two-lane-highway";
  }
  return "unknown";
}

RoadLayout road_layout_from_string(const std::string& name) {
  if (name == "straight") return RoadLayout::straight;
  if (name == "grid-intersection") return RoadLayout::grid_intersection;
  if (name == "two-lane-highway") return RoadLayout::two_lane_highway;
  throw InvalidParameter("unknown road layout '" + name + "'");
}

std::size_t sample_count_for(double duration, double dt) {
  return static_cast<std::size_t>(std::llround(std::floor(duration / dt + 1e-9))) + 1;
}

Trajectory constant_velocity_trajectory(const Pose& start, double speed, double duration, double dt,
                                        std::string vehicle_id) {
  if (!(speed >= 0.0) || !std::isfinite(speed)) throw InvalidParameter("speed must be finite and >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt must be positive");
  if (!(duration >= dt)) throw InvalidParameter("duration must cover at least one step");
  if (!start.finite()) throw InvalidParameter("start pose must be finite");

  Trajectory trajectory{std::move(vehicle_id), dt, {}};
  const std::size_t n = sample_count_for(duration, dt);
  trajectory.poses.reserve(n);
  const double heading = normalize_heading(start.heading);
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = speed * static_cast<double>(i) * dt;
    trajectory.poses.push_back({start.x + d * c, start.y + d * s, start.z, heading});
  }
  return trajectory;
}

void append_rectangle(PointCloud& cloud, const Vec3& origin, const Vec3& edge_u, const Vec3& edge_v,
                      double spacing) {
  const auto nu = static_cast<int>(std::ceil(norm(edge_u) / spacing));
  const auto nv = static_cast<int>(std::ceil(norm(edge_v) / spacing));
  for (int i = 0; i <= nu; ++i) {
    const double a = nu == 0 ? 0.0 : static_cast<double>(i) / nu;
    for (int j = 0; j <= nv; ++j) {
      const double b = nv == 0 ? 0.0 : static_cast<double>(j) / nv;
      cloud.points.push_back(origin + a * edge_u + b * edge_v);
    }
  }
}

void append_box_surface(PointCloud& cloud, const Vec3& lo, const Vec3& hi, double spacing) {
  const Vec3 ex{hi.x - lo.x, 0, 0};
  const Vec3 ey{0, hi.y - lo.y, 0};
  const Vec3 ez{0, 0, hi.z - lo.z};
  append_rectangle(cloud, lo, ex, ez, spacing);
  append_rectangle(cloud, lo + ey, ex, ez, spacing);
  append_rectangle(cloud, lo, ey, ez, spacing);
  append_rectangle(cloud, lo + ex, ey, ez, spacing);
  append_rectangle(cloud, lo + ez, ex, ey, spacing);
}

namespace {

struct Lane {
  Vec3 origin;      // position at along-lane coordinate 0
  double heading;   // direction of travel
  int road;         // lanes on different roads may cross
};

std::vector<Lane> lanes_for(RoadLayout layout) {
  constexpr double half = kLaneWidth / 2.0;
  constexpr double pi = std::numbers::pi;
  switch (layout) {
    case RoadLayout::straight:
      return {{{0, half, 0}, 0.0, 0},
              {{0, half + kLaneWidth, 0}, 0.0, 0},
              {{0, half + 2 * kLaneWidth, 0}, 0.0, 0},
              {{0, half + 3 * kLaneWidth, 0}, 0.0, 0}};
    case RoadLayout::two_lane_highway:
      return {{{0, half, 0}, 0.0, 0},
              {{0, half + kLaneWidth, 0}, 0.0, 0},
              {{300, -half, 0}, -pi, 0},
              {{300, -half - kLaneWidth, 0}, -pi, 0}};
    case RoadLayout::grid_intersection:
      // Two roads crossing at the origin, one lane per direction; along-lane
      // coordinate 0 is 160 m upstream of the crossing.
      return {{{-160, -half, 0}, 0.0, 0},
              {{160, half, 0}, -pi, 0},
              {{half, -160, 0}, pi / 2, 1},
              {{-half, 160, 0}, -pi / 2, 1}};
  }
  return {};
}

void populate_world(RoadLayout layout, PointCloud& world) {
  constexpr double spacing = 1.0;
  if (layout == RoadLayout::grid_intersection) {
    // One building per block corner plus a coarse ground grid.
    for (int sx : {-1, 1}) {
      for (int sy : {-1, 1}) {
        const Vec3 lo{sx > 0 ? 8.0 : -28.0, sy > 0 ? 8.0 : -28.0, 0.0};
        append_box_surface(world, lo, lo + Vec3{20, 20, 10}, spacing);
      }
    }
    append_rectangle(world, {-100, -100, 0}, {200, 0, 0}, {0, 200, 0}, 10.0);
    return;
  }
  const double y_top = layout == RoadLayout::straight ? 16.0 : 10.0;
  const double y_bottom = layout == RoadLayout::straight ? -6.0 : -10.0;
  for (double x = 0.0; x < 480.0; x += 60.0) {
    append_box_surface(world, {x, y_top, 0}, {x + 30, y_top + 8, 8}, spacing * 2);
    append_box_surface(world, {x + 20, y_bottom - 8, 0}, {x + 50, y_bottom, 8}, spacing * 2);
  }
  append_rectangle(world, {-20, y_bottom, 0}, {520, 0, 0}, {0, y_top - y_bottom, 0}, 5.0);
}

}  // namespace

Scenario generate_scenario(RoadLayout layout, int n_vehicles, double duration, double dt,
                           std::uint64_t seed) {
  if (n_vehicles < 2) throw InvalidParameter("n_vehicles must be >= 2");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt must be positive");
  if (!(duration >= 2.0 * dt) || !std::isfinite(duration))
    throw InvalidParameter("duration must be >= 2*dt");

  SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(layout), 0x5ce7a110ULL));
  std::uniform_real_distribution<double> speed_dist(8.0, 20.0);
  std::uniform_real_distribution<double> start_dist(0.0, 140.0);

  const auto lanes = lanes_for(layout);
  std::vector<double> lane_speed;
  for (std::size_t i = 0; i < lanes.size(); ++i) lane_speed.push_back(speed_dist(rng));

  Scenario scenario;
  scenario.scenario_id = to_string(layout) + "-" + std::to_string(seed);
  scenario.duration = duration;
  scenario.dt = dt;
  scenario.rng_seed = seed;

  std::vector<int> lane_of;
  for (int v = 0; v < n_vehicles; ++v) {
    const auto lane_index = static_cast<std::size_t>(v) % lanes.size();
    const Lane& lane = lanes[lane_index];
    const double c = std::cos(lane.heading);
    const double s = std::sin(lane.heading);

    Trajectory candidate;
    constexpr int kMaxAttempts = 2000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      const double along = start_dist(rng);
      const Pose start = make_pose(lane.origin.x + along * c, lane.origin.y + along * s, 0.0, lane.heading);
      candidate = constant_velocity_trajectory(start, lane_speed[lane_index], duration, dt,
                                               "veh" + std::to_string(v));
      bool ok = true;
      for (std::size_t other = 0; other < scenario.trajectories.size() && ok; ++other) {
        const auto& placed = scenario.trajectories[other];
        if (distance(placed.poses.front().position(), candidate.poses.front().position()) <
            kMinInitialSeparation) {
          ok = false;
          break;
        }
        // Crossing roads: keep vehicles apart for the whole rollout.
        if (lanes[static_cast<std::size_t>(lane_of[other])].road != lane.road) {
          for (std::size_t k = 0; k < candidate.poses.size(); ++k) {
            if (distance(placed.poses[k].position(), candidate.poses[k].position()) <
                kMinInitialSeparation) {
              ok = false;
              break;
            }
          }
        }
      }
      if (ok) break;
      if (attempt + 1 == kMaxAttempts)
        throw InvalidParameter("cannot place " + std::to_string(n_vehicles) +
                               " vehicles without conflicts; reduce n_vehicles");
    }
    scenario.trajectories.push_back(std::move(candidate));
    lane_of.push_back(static_cast<int>(lane_index));
  }
  scenario.ego_id = scenario.trajectories.front().vehicle_id;
  populate_world(layout, scenario.world);
  return scenario;
}

double max_step_displacement(const Trajectory& trajectory) {
  double worst = 0.0;
  for (std::size_t i = 1; i < trajectory.poses.size(); ++i) {
    worst = std::max(worst, distance(trajectory.poses[i - 1].position(), trajectory.poses[i].position()));
  }
  return worst;
}

void validate_scenario(const Scenario& scenario, double max_speed) {
  if (scenario.trajectories.empty()) throw InvalidParameter("scenario has no trajectories");
  (void)scenario.ego_index();
  const std::size_t n = scenario.sample_count();
  for (const auto& t : scenario.trajectories) {
    if (t.poses.size() < 2) throw InvalidParameter("trajectory " + t.vehicle_id + " has < 2 samples");
    if (t.poses.size() != n) throw InvalidParameter("trajectory " + t.vehicle_id + " length differs");
    if (t.dt != scenario.dt) throw InvalidParameter("trajectory " + t.vehicle_id + " dt differs");
    for (const auto& p : t.poses) {
      if (!p.finite()) throw InvalidParameter("trajectory " + t.vehicle_id + " has a non-finite pose");
    }
    if (max_step_displacement(t) > max_speed * t.dt + 1e-9)
      throw InvalidParameter("trajectory " + t.vehicle_id + " exceeds the kinematic bound");
  }
}

// --- CSV import -------------------------------------------------------------

namespace {

struct Row {
  double t;
  Pose pose;
};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& text, std::size_t line, const char* column) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last || !std::isfinite(value))
    throw ParseError(line, std::string("invalid number in column '") + column + "': '" + text + "'");
  return value;
}

double lerp_angle(double a, double b, double alpha) {
  return normalize_heading(a + alpha * normalize_heading(b - a));
}

}  // namespace

Scenario import_trajectories(std::istream& in, std::optional<double> dt) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (line != "vehicle_id,t,x,y,z,heading")
    throw ParseError(1, "expected header 'vehicle_id,t,x,y,z,heading'");

  std::vector<std::string> order;
  std::map<std::string, std::vector<Row>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 6)
      throw ParseError(line_no, "expected 6 fields, got " + std::to_string(fields.size()));
    const std::string& id = fields[0];
    if (id.empty()) throw ParseError(line_no, "empty vehicle_id");
    Row row{parse_number(fields[1], line_no, "t"),
            make_pose(parse_number(fields[2], line_no, "x"), parse_number(fields[3], line_no, "y"),
                      parse_number(fields[4], line_no, "z"), parse_number(fields[5], line_no, "heading"))};
    auto [it, inserted] = rows.try_emplace(id);
    if (inserted) order.push_back(id);
    if (!it->second.empty() && !(row.t > it->second.back().t))
      throw InconsistentVehicle(id, "line " + std::to_string(line_no) + ": timestamps of vehicle '" + id +
                                        "' are not strictly increasing");
    it->second.push_back(row);
  }
  if (order.empty()) throw ParseError(line_no, "no data rows");

  for (const auto& id : order) {
    if (rows[id].size() < 2) throw InconsistentVehicle(id, "vehicle '" + id + "' has fewer than 2 samples");
  }
  const auto& first = rows[order.front()];
  const double step = dt.value_or(first[1].t - first[0].t);
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidParameter("resampling dt must be positive");

  double start = -std::numeric_limits<double>::infinity();
  double end = std::numeric_limits<double>::infinity();
  for (const auto& id : order) {
    start = std::max(start, rows[id].front().t);
    end = std::min(end, rows[id].back().t);
  }
  if (!(end - start >= step - 1e-9))
    throw InvalidParameter("vehicles do not share a time interval of at least one dt");

  const std::size_t n = sample_count_for(end - start, step);
  Scenario scenario;
  scenario.scenario_id = "imported";
  scenario.dt = step;
  scenario.duration = step * static_cast<double>(n - 1);
  for (const auto& id : order) {
    const auto& samples = rows[id];
    Trajectory trajectory{id, step, {}};
    trajectory.poses.reserve(n);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = start + static_cast<double>(i) * step;
      while (seg + 2 < samples.size() && samples[seg + 1].t <= t) ++seg;
      const Row& a = samples[seg];
      const Row& b = samples[seg + 1];
      const double alpha = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
      trajectory.poses.push_back({a.pose.x + alpha * (b.pose.x - a.pose.x),
                                  a.pose.y + alpha * (b.pose.y - a.pose.y),
                                  a.pose.z + alpha * (b.pose.z - a.pose.z),
                                  lerp_angle(a.pose.heading, b.pose.heading, alpha)});
    }
    scenario.trajectories.push_back(std::move(trajectory));
  }
  scenario.ego_id = order.front();
  return scenario;
}

Scenario import_trajectories_file(const std::string& path, std::optional<double> dt) {
  std::ifstream in(path);
  if (!in) throw Error("io-error", "cannot open '" + path + "'");
  return import_trajectories(in, dt);
}

}  // namespace coopriv
