#include "coopriv/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "coopriv/error.hpp"
#include "coopriv/format.hpp"
#include "coopriv/random.hpp"
#include "coopriv/svg_plot.hpp"

namespace coopriv {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::privacy_sweep: return "privacy-sweep";
    case ExperimentKind::nvs_context: return "nvs-context";
    case ExperimentKind::schedule: return "schedule";
    case ExperimentKind::billing_demo: return "billing-demo";
  }
  return "unknown";
}

namespace {

std::string join_messages(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) out += (out.empty() ? "" : "; ") + v.field + ": " + v.message;
  return out;
}

}  // namespace

ConstraintViolation::ConstraintViolation(std::vector<Violation> violations)
    : Error("constraint-violation", join_messages(violations)), violations_(std::move(violations)) {}

// --- overrides and loading ----------------------------------------------------

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigParseError("", "override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &config;
  std::stringstream path(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(path, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty()) throw ConfigParseError(key, "empty path component");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigParseError(key, "'" + parts[i - 1] + "' is not an object");
      *node = json::object();
    }
    node = &(*node)[parts[i]];
  }
  *node = std::move(value);
}

json load_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io-error", "cannot read config '" + path.string() + "'");
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigParseError("", std::string("invalid JSON: ") + e.what());
  }
}

// --- parsing --------------------------------------------------------------------

namespace {

class Section {
 public:
  Section(const json* node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_->is_null() && !node_->is_object()) throw ConfigParseError(path_, "must be an object");
  }

  bool has(const char* key) const { return node_ && node_->is_object() && node_->contains(key); }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  Section sub(const char* key) const { return Section(has(key) ? &node_->at(key) : nullptr, field(key)); }

  void allow(std::initializer_list<const char*> keys) const {
    if (!node_ || !node_->is_object()) return;
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : node_->items())
      if (!allowed.count(k)) throw ConfigParseError(field(k.c_str()), "unknown key");
  }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_->at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    }
    if (v.is_null()) return std::numeric_limits<double>::infinity();
    throw ConfigParseError(field(key), "expected a number");
  }

  std::int64_t integer(const char* key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_->at(key);
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
    }
    throw ConfigParseError(field(key), "expected an integer");
  }

  std::uint64_t unsigned_integer(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_->at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigParseError(field(key), "expected a non-negative integer");
  }

  std::string text(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_->at(key);
    if (!v.is_string()) throw ConfigParseError(field(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const char* key, const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_->at(key);
    if (!v.is_array()) throw ConfigParseError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigParseError(field(key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::vector<std::int64_t> integers(const char* key, const std::vector<std::int64_t>& fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_->at(key);
    if (!v.is_array()) throw ConfigParseError(field(key), "expected an array of integers");
    std::vector<std::int64_t> out;
    for (const auto& x : v) {
      if (!x.is_number_integer()) throw ConfigParseError(field(key), "expected an array of integers");
      out.push_back(x.get<std::int64_t>());
    }
    return out;
  }

  std::vector<std::string> strings(const char* key, const std::vector<std::string>& fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_->at(key);
    if (!v.is_array()) throw ConfigParseError(field(key), "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& x : v) {
      if (!x.is_string()) throw ConfigParseError(field(key), "expected an array of strings");
      out.push_back(x.get<std::string>());
    }
    return out;
  }

  template <typename Fn>
  auto enumeration(const char* key, const std::string& fallback, Fn&& convert) const {
    const std::string name = text(key, fallback);
    try {
      return convert(name);
    } catch (const Error& e) {
      throw ConfigParseError(field(key), e.what());
    }
  }

 private:
  const json* node_;
  std::string path_;
};

ExperimentKind experiment_from_string(const std::string& name) {
  if (name == "privacy-sweep") return ExperimentKind::privacy_sweep;
  if (name == "nvs-context") return ExperimentKind::nvs_context;
  if (name == "schedule") return ExperimentKind::schedule;
  if (name == "billing-demo") return ExperimentKind::billing_demo;
  throw InvalidParameter("unknown experiment '" + name +
                         "' (expected privacy-sweep, nvs-context, schedule or billing-demo)");
}

std::size_t to_count(std::int64_t v) { return v < 0 ? 0 : static_cast<std::size_t>(v); }

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigParseError("", "config must be a JSON object");
  Section root(&doc, "");
  root.allow({"experiment", "seed", "output_dir", "scenario", "policy", "pseudonym", "sweep", "adversary", "nvs",
              "scheduler", "billing"});
  if (!root.has("experiment")) throw ConfigParseError("experiment", "missing");

  ExperimentConfig c;
  c.experiment = root.enumeration("experiment", "", experiment_from_string);
  c.seed = root.unsigned_integer("seed", 1);
  c.output_dir = root.text("output_dir", "");

  // privacy sweep
  SweepConfig& s = c.sweep;
  const Section scenario = root.sub("scenario");
  scenario.allow({"layouts", "scenes", "vehicles", "duration", "dt", "import_csv"});
  s.suite.layouts.clear();
  for (const auto& name : scenario.strings("layouts", {"straight", "grid-intersection", "two-lane-highway"})) {
    try {
      s.suite.layouts.push_back(road_layout_from_string(name));
    } catch (const Error& e) {
      throw ConfigParseError(scenario.field("layouts"), e.what());
    }
  }
  s.suite.scenes = static_cast<int>(scenario.integer("scenes", 20));
  s.suite.vehicles = static_cast<int>(scenario.integer("vehicles", 8));
  s.suite.duration = scenario.number("duration", 20.0);
  s.suite.dt = scenario.number("dt", 0.1);
  s.suite.seed = c.seed;
  c.import_csv = scenario.text("import_csv", "");

  const Section policy = root.sub("policy");
  policy.allow({"kind", "walk_step_fraction"});
  s.policy = policy.enumeration("kind", "gaussian", policy_kind_from_string);
  s.walk_step_fraction = policy.number("walk_step_fraction", 0.25);

  const Section pseudonym = root.sub("pseudonym");
  pseudonym.allow({"mode", "k"});
  const std::string mode = pseudonym.text("mode", "constant");
  if (mode == "constant") s.pseudonyms.mode = PseudonymMode::constant;
  else if (mode == "rotate") s.pseudonyms.mode = PseudonymMode::rotate_every_k_frames;
  else throw ConfigParseError(pseudonym.field("mode"), "expected 'constant' or 'rotate'");
  const std::int64_t k = pseudonym.integer("k", 10);
  s.pseudonyms.k = k < 0 ? 0 : static_cast<std::uint64_t>(k);

  const Section sweep = root.sub("sweep");
  sweep.allow({"sigmas", "rollouts_per_scene"});
  s.values = sweep.numbers("sigmas", {0, 2, 4, 8, 12, 16});
  s.rollouts_per_scene = static_cast<int>(sweep.integer("rollouts_per_scene", 50));
  s.seed = c.seed;

  const Section adversary = root.sub("adversary");
  adversary.allow({"sensing_radius", "gate_radius", "share_rate", "tracker"});
  s.privacy.sensing_radius = adversary.number("sensing_radius", 100.0);
  s.privacy.gate_radius = adversary.number("gate_radius", 25.0);
  s.privacy.tracker = adversary.enumeration("tracker", "nearest-neighbor", tracker_mode_from_string);
  s.stream.share_rate = adversary.number("share_rate", 10.0);
  s.stream.payload.nominal_rate = static_cast<float>(s.stream.share_rate);

  // nvs
  NvsStudyConfig& n = c.nvs;
  const Section nvs = root.sub("nvs");
  nvs.allow({"intrinsics", "corridor", "frames", "step", "offsets", "contexts", "mask_fraction"});
  const Section intr = nvs.sub("intrinsics");
  intr.allow({"fx", "fy", "cx", "cy", "width", "height"});
  n.intrinsics.fx = intr.number("fx", n.intrinsics.fx);
  n.intrinsics.fy = intr.number("fy", n.intrinsics.fy);
  n.intrinsics.cx = intr.number("cx", n.intrinsics.cx);
  n.intrinsics.cy = intr.number("cy", n.intrinsics.cy);
  n.intrinsics.width = static_cast<int>(intr.integer("width", n.intrinsics.width));
  n.intrinsics.height = static_cast<int>(intr.integer("height", n.intrinsics.height));
  const Section corridor = nvs.sub("corridor");
  corridor.allow({"length", "half_width", "height", "spacing"});
  n.corridor_length = corridor.number("length", n.corridor_length);
  n.corridor_half_width = corridor.number("half_width", n.corridor_half_width);
  n.corridor_height = corridor.number("height", n.corridor_height);
  n.spacing = corridor.number("spacing", n.spacing);
  n.frames = to_count(nvs.integer("frames", static_cast<std::int64_t>(n.frames)));
  n.step = nvs.number("step", n.step);
  n.offsets = nvs.numbers("offsets", n.offsets);
  n.contexts.clear();
  for (auto v : nvs.integers("contexts", {1, 2, 4, 8})) n.contexts.push_back(to_count(v));
  n.mask_fraction = nvs.number("mask_fraction", n.mask_fraction);

  // scheduler
  ScheduleStudyConfig& sc = c.schedule;
  const Section sched = root.sub("scheduler");
  sched.allow({"proprietary_period", "open_period", "swap_latency", "compute_budget", "e2e_deadline",
               "proprietary_duration", "open_duration", "horizon", "network_delay", "demands"});
  sc.stack.proprietary_period = sched.number("proprietary_period", sc.stack.proprietary_period);
  sc.stack.open_period = sched.number("open_period", sc.stack.open_period);
  sc.stack.swap_latency = sched.number("swap_latency", sc.stack.swap_latency);
  sc.stack.compute_budget = sched.number("compute_budget", sc.stack.compute_budget);
  sc.stack.e2e_deadline = sched.number("e2e_deadline", sc.stack.e2e_deadline);
  sc.stack.proprietary_duration = sched.number("proprietary_duration", sc.stack.proprietary_duration);
  sc.stack.open_duration = sched.number("open_duration", sc.stack.open_duration);
  sc.horizon = sched.number("horizon", sc.horizon);
  sc.network_delay = sched.number("network_delay", sc.network_delay);
  const Section demands = sched.sub("demands");
  demands.allow({"count", "elevated_fraction", "recipients"});
  sc.demands.count = to_count(demands.integer("count", static_cast<std::int64_t>(sc.demands.count)));
  sc.demands.elevated_fraction = demands.number("elevated_fraction", sc.demands.elevated_fraction);
  sc.demands.recipients = demands.strings("recipients", sc.demands.recipients);

  // billing
  BillingStudyConfig& b = c.billing;
  const Section billing = root.sub("billing");
  billing.allow({"unit_cost", "priority_multiplier", "subscription_flat", "sharers", "recipients",
                 "requests_per_recipient", "elevated_fraction"});
  b.tariff.unit_cost = billing.integer("unit_cost", b.tariff.unit_cost);
  b.tariff.priority_multiplier = billing.number("priority_multiplier", b.tariff.priority_multiplier);
  b.tariff.subscription_flat = billing.integer("subscription_flat", b.tariff.subscription_flat);
  b.sharers = to_count(billing.integer("sharers", static_cast<std::int64_t>(b.sharers)));
  b.recipients = billing.strings("recipients", b.recipients);
  b.requests_per_recipient =
      to_count(billing.integer("requests_per_recipient", static_cast<std::int64_t>(b.requests_per_recipient)));
  b.elevated_fraction = billing.number("elevated_fraction", b.elevated_fraction);
  return c;
}

// --- validation -------------------------------------------------------------

namespace {

void check(std::vector<Violation>& out, bool ok, std::string field, std::string message) {
  if (!ok) out.push_back({std::move(field), std::move(message)});
}

bool finite_positive(double x) { return x > 0.0 && std::isfinite(x); }
bool fraction(double x) { return x >= 0.0 && x <= 1.0; }

std::vector<Violation> check_constraints(const ExperimentConfig& c) {
  std::vector<Violation> v;
  const SweepConfig& s = c.sweep;
  check(v, !s.suite.layouts.empty(), "scenario.layouts", "must not be empty");
  check(v, s.suite.scenes >= 1, "scenario.scenes", "must be >= 1");
  check(v, s.suite.vehicles >= 2, "scenario.vehicles", "Scenario needs >= 2 vehicles");
  check(v, finite_positive(s.suite.dt), "scenario.dt", "must be positive");
  check(v, std::isfinite(s.suite.duration) && s.suite.duration >= 2 * s.suite.dt, "scenario.duration",
        "must be >= 2*dt");
  check(v, s.walk_step_fraction >= 0.0 && std::isfinite(s.walk_step_fraction), "policy.walk_step_fraction",
        "ObfuscationPolicy: must be >= 0");
  check(v, s.pseudonyms.mode == PseudonymMode::constant || s.pseudonyms.k >= 1, "pseudonym.k",
        "PseudonymPolicy: must be >= 1");
  check(v, !s.values.empty(), "sweep.sigmas", "must not be empty");
  for (double x : s.values)
    check(v, x >= 0.0 && std::isfinite(x), "sweep.sigmas", "ObfuscationPolicy: values must be finite and >= 0");
  check(v, s.rollouts_per_scene >= 1, "sweep.rollouts_per_scene", "must be >= 1");
  check(v, finite_positive(s.privacy.sensing_radius), "adversary.sensing_radius", "must be > 0");
  check(v, s.privacy.gate_radius >= 0.0 && std::isfinite(s.privacy.gate_radius), "adversary.gate_radius",
        "must be >= 0");
  check(v, finite_positive(s.stream.share_rate), "adversary.share_rate", "must be > 0");
  if (!c.import_csv.empty())
    check(v, std::filesystem::exists(c.import_csv), "scenario.import_csv", "file does not exist");

  const NvsStudyConfig& n = c.nvs;
  try {
    n.intrinsics.validate();
  } catch (const Error& e) {
    v.push_back({"nvs.intrinsics", e.what()});
  }
  check(v, finite_positive(n.spacing), "nvs.corridor.spacing", "must be > 0");
  check(v, finite_positive(n.corridor_length) && finite_positive(n.corridor_half_width) &&
               finite_positive(n.corridor_height),
        "nvs.corridor", "dimensions must be > 0");
  check(v, n.frames >= 1, "nvs.frames", "must be >= 1");
  check(v, finite_positive(n.step), "nvs.step", "must be > 0");
  check(v, !n.contexts.empty() && std::is_sorted(n.contexts.begin(), n.contexts.end()), "nvs.contexts",
        "must be a non-empty ascending list");
  for (std::size_t k : n.contexts) check(v, k >= 1 && k <= n.frames, "nvs.contexts", "each entry must be in [1, frames]");
  for (double o : n.offsets) check(v, std::isfinite(o), "nvs.offsets", "must be finite");
  check(v, !n.offsets.empty(), "nvs.offsets", "must not be empty");
  check(v, fraction(n.mask_fraction), "nvs.mask_fraction", "must be in [0, 1]");

  const ScheduleStudyConfig& sc = c.schedule;
  const auto stack_violations = check_stack_config(sc.stack);
  for (const auto& sv : stack_violations) v.push_back({"scheduler." + sv.field, "StackConfig: " + sv.message});
  check(v, finite_positive(sc.horizon), "scheduler.horizon", "must be > 0");
  check(v, sc.network_delay >= 0.0 && std::isfinite(sc.network_delay), "scheduler.network_delay", "must be >= 0");
  check(v, fraction(sc.demands.elevated_fraction), "scheduler.demands.elevated_fraction", "must be in [0, 1]");
  check(v, !sc.demands.recipients.empty(), "scheduler.demands.recipients", "must not be empty");
  if (stack_violations.empty() && finite_positive(sc.horizon)) {
    try {
      (void)build_timeline(sc.stack, {}, sc.horizon);
    } catch (const InfeasibleConfig& e) {
      v.push_back({"scheduler", std::string("StackConfig infeasible: ") + e.what()});
    }
  }

  const BillingStudyConfig& b = c.billing;
  check(v, b.tariff.unit_cost >= 0, "billing.unit_cost", "Tariff: must be >= 0");
  check(v, b.tariff.priority_multiplier >= 1.0 && std::isfinite(b.tariff.priority_multiplier),
        "billing.priority_multiplier", "Tariff: must be >= 1");
  check(v, b.tariff.subscription_flat >= 0, "billing.subscription_flat", "Tariff: must be >= 0");
  check(v, b.sharers >= 1, "billing.sharers", "must be >= 1");
  check(v, !b.recipients.empty(), "billing.recipients", "must not be empty");
  check(v, fraction(b.elevated_fraction), "billing.elevated_fraction", "must be in [0, 1]");
  return v;
}

}  // namespace

std::vector<Violation> validate_config(const json& config) {
  try {
    return check_constraints(parse_config(config));
  } catch (const ConfigParseError& e) {
    return {{e.field().empty() ? "config" : e.field(), e.what()}};
  }
}

// --- running ------------------------------------------------------------------

std::vector<DemandRequest> generate_demands(const DemandSpec& spec, double horizon, std::uint64_t seed) {
  SplitMix64 rng(derive_seed(seed, 0xde3a2dULL));
  std::uniform_real_distribution<double> when(0.0, horizon);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> who(0, spec.recipients.size() - 1);
  std::vector<DemandRequest> demands;
  for (std::size_t i = 0; i < spec.count; ++i) {
    DemandRequest d;
    // Microsecond resolution keeps timestamps exactly representable in CSV/JSON.
    d.t = static_cast<double>(std::llround(when(rng) * 1e6)) * 1e-6;
    d.recipient_id = spec.recipients[who(rng)];
    d.priority = unit(rng) < spec.elevated_fraction ? Priority::elevated : Priority::normal;
    demands.push_back(std::move(d));
  }
  std::stable_sort(demands.begin(), demands.end(),
                   [](const DemandRequest& a, const DemandRequest& b) { return a.t < b.t; });
  return demands;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content, RunOutcome& outcome) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io-error", "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("io-error", "failed writing '" + path.string() + "'");
  outcome.files.push_back(path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json run_privacy_sweep(const ExperimentConfig& c, const RunOptions& options, RunOutcome& outcome) {
  SweepConfig config = c.sweep;
  if (!c.import_csv.empty()) config.custom_scenes.push_back(import_trajectories_file(c.import_csv, config.suite.dt));
  const SweepResult result = run_sweep(config, options.jobs);

  std::string csv = sweep_csv_header() + "\n";
  PlotSeries confusion{"mean_confusion", {}, {}};
  json rows = json::array();
  for (const auto& row : result.rows) {
    csv += sweep_csv_row(row) + "\n";
    confusion.x.push_back(row.value);
    confusion.y.push_back(row.mean_confusion);
    rows.push_back({{"sigma", row.value},
                    {"mean_confusion", row.mean_confusion},
                    {"sd_confusion", row.sd_confusion},
                    {"mean_rmse", row.mean_rmse},
                    {"sd_rmse", row.sd_rmse},
                    {"mean_rmse_matched", std::isfinite(row.mean_rmse_matched) ? json(row.mean_rmse_matched) : json()},
                    {"n_rollouts", row.n_rollouts},
                    {"skipped", row.skipped}});
  }
  write_file(outcome.output_dir / "results.csv", csv, outcome);
  const std::string variable = config.policy == PolicyKind::gaussian ? "sigma per axis (m)"
                               : config.policy == PolicyKind::fixed_offset ? "offset radius (m)"
                                                                           : "max offset radius (m)";
  write_file(outcome.output_dir / "plot.svg",
             render_svg({"Adversary confusion vs forged-pose offset", variable, "mean confusion rate", {confusion}}),
             outcome);
  return {{"rows", rows},
          {"rollouts_executed", result.rollouts_executed},
          {"scenes", config.scene_count()},
          {"policy", to_string(config.policy)},
          {"sweep_variable", variable},
          {"reference_anchor",
           {{"description", "published OPV2V study at a 12 m offset; context only, not comparable to synthetic scenes"},
            {"confusion_rate", 0.25},
            {"rmse_m_lower_bound", 45.0}}}};
}

json run_nvs_context(const ExperimentConfig& c, const RunOptions& options, RunOutcome& outcome) {
  const NvsStudyConfig& n = c.nvs;
  const PointCloud world = corridor_scene(n.corridor_length, n.corridor_half_width, n.corridor_height, n.spacing);
  const auto trajectory = corridor_trajectory(n.frames, n.step);

  std::string csv = context_csv_header() + "\n";
  std::vector<PlotSeries> series;
  json masked = json::array();
  for (std::size_t oi = 0; oi < n.offsets.size(); ++oi) {
    const double offset = n.offsets[oi];
    const auto rows = hole_fraction_vs_context(world, trajectory, offset, n.contexts, n.intrinsics, options.jobs);
    PlotSeries s{"offset " + format_number(offset) + " m", {}, {}};
    for (const auto& r : rows) {
      csv += context_csv_row(r) + "\n";
      s.x.push_back(static_cast<double>(r.context_length));
      s.y.push_back(r.hole_fraction);
    }
    series.push_back(std::move(s));

    // Mitigation: random mask over the longest-context novel render.
    std::vector<DepthView> views;
    for (std::size_t i = 0; i < n.contexts.back(); ++i) {
      const Pose& pose = trajectory[trajectory.size() - 1 - i];
      views.push_back({pose, render_depth(n.intrinsics, pose, world, options.jobs).depth});
    }
    const Pose novel = lateral_offset(trajectory.back(), offset);
    const RenderReport report = render_depth(n.intrinsics, novel, fuse_frames(views, n.intrinsics), options.jobs);
    const DepthMap mask = apply_random_mask(report.depth, n.mask_fraction, c.seed);
    masked.push_back({{"novel_offset", offset},
                      {"context_length", n.contexts.back()},
                      {"hole_fraction", report.hole_fraction},
                      {"masked_hole_fraction", mask.hole_fraction()},
                      {"mask_fraction", n.mask_fraction}});
    if (oi == 0) {
      std::ostringstream grid;
      write_depth_grid(grid, mask);
      write_file(outcome.output_dir / "novel_depth.txt", grid.str(), outcome);
    }
  }
  write_file(outcome.output_dir / "results.csv", csv, outcome);
  write_file(outcome.output_dir / "plot.svg",
             render_svg({"Novel-view holes vs fused context", "context length (frames)", "hole fraction", series}),
             outcome);
  return {{"world_points", world.size()}, {"masked", masked}};
}

json run_schedule(const ExperimentConfig& c, RunOutcome& outcome) {
  const ScheduleStudyConfig& sc = c.schedule;
  const auto demands = generate_demands(sc.demands, sc.horizon, c.seed);
  const Timeline timeline = build_timeline(sc.stack, demands, sc.horizon);
  const EffectiveRates rates = effective_rates(timeline);

  std::string csv = timeline_csv_header() + "\n";
  PlotSeries s{"slot duration", {}, {}};
  for (const auto& slot : timeline.slots) {
    csv += timeline_csv_row(slot) + "\n";
    s.x.push_back(slot.start);
    s.y.push_back(slot.duration);
  }
  write_file(outcome.output_dir / "results.csv", csv, outcome);
  write_file(outcome.output_dir / "plot.svg",
             render_svg({"Duty-cycled stack timeline (open slots run longer)", "slot start (s)", "slot duration (s)", {s}}),
             outcome);

  double latency_sum = 0.0, latency_max = 0.0;
  std::size_t met = 0, served = 0;
  for (const auto& d : demands) {
    try {
      const auto r = e2e_latency(timeline, d, sc.network_delay);
      latency_sum += r.latency;
      latency_max = std::max(latency_max, r.latency);
      met += r.deadline_met ? 1 : 0;
      ++served;
    } catch (const NoOpenSlot&) {
    }
  }
  return {{"proprietary_hz", rates.proprietary_hz},
          {"open_hz", rates.open_hz},
          {"nominal_proprietary_hz", 1.0 / sc.stack.proprietary_period},
          {"note", "open slots replace proprietary slots on the shared grid, so proprietary_hz is below the nominal rate"},
          {"swap_count", rates.swap_count},
          {"utilization", rates.utilization},
          {"demands", demands.size()},
          {"served", served},
          {"unserved", timeline.unserved.size()},
          {"mean_latency_s", served ? json(latency_sum / static_cast<double>(served)) : json()},
          {"max_latency_s", latency_max},
          {"deadline_met_fraction", served ? json(static_cast<double>(met) / static_cast<double>(served)) : json()}};
}

json run_billing(const ExperimentConfig& c, RunOutcome& outcome) {
  const BillingStudyConfig& b = c.billing;
  const double horizon = c.schedule.horizon;
  std::vector<Invoice> invoices;
  for (std::size_t s = 0; s < b.sharers; ++s) {
    DemandSpec spec{b.requests_per_recipient * b.recipients.size(), b.elevated_fraction, b.recipients};
    const auto demands = generate_demands(spec, horizon, derive_seed(c.seed, s));
    const Timeline timeline = build_timeline(c.schedule.stack, demands, horizon);
    auto issued = meter(timeline.ledger, b.tariff, {0.0, horizon + c.schedule.stack.proprietary_period}, b.recipients,
                        "sharer-" + std::to_string(s));
    invoices.insert(invoices.end(), issued.begin(), issued.end());
  }
  const SettlementMatrix matrix = settle(invoices);

  std::ostringstream csv;
  write_settlement_csv(csv, matrix);
  write_file(outcome.output_dir / "results.csv", csv.str(), outcome);

  json invoice_json = json::array();
  Money invoice_total = 0;
  for (const auto& inv : invoices) {
    json items = json::array();
    for (const auto& li : inv.line_items) items.push_back({{"t", li.t}, {"priority", to_string(li.priority)}, {"amount", li.amount}});
    invoice_json.push_back({{"payee", inv.payee},
                            {"recipient_id", inv.recipient_id},
                            {"period", {inv.period.start, inv.period.end}},
                            {"line_items", items},
                            {"total", inv.total}});
    invoice_total += inv.total;
  }
  write_file(outcome.output_dir / "invoices.json", dump(invoice_json), outcome);

  std::vector<PlotSeries> series;
  for (std::size_t j = 0; j < matrix.payees.size(); ++j) {
    PlotSeries s{matrix.payees[j], {}, {}};
    for (std::size_t i = 0; i < matrix.payers.size(); ++i) {
      s.x.push_back(static_cast<double>(i));
      s.y.push_back(static_cast<double>(matrix.amounts[i][j]));
    }
    series.push_back(std::move(s));
  }
  write_file(outcome.output_dir / "plot.svg",
             render_svg({"Settlement per payer (minor units)", "payer (row index)", "amount owed", series}), outcome);
  return {{"invoice_total", invoice_total},
          {"settlement_total", matrix.grand_total()},
          {"payers", matrix.payers},
          {"payees", matrix.payees}};
}

}  // namespace

RunOutcome run_experiment(const json& doc, const RunOptions& options) {
  const ExperimentConfig config = parse_config(doc);
  if (auto violations = check_constraints(config); !violations.empty()) throw ConstraintViolation(std::move(violations));

  RunOutcome outcome;
  outcome.output_dir = !options.output_dir.empty() ? options.output_dir
                       : !config.output_dir.empty() ? std::filesystem::path(config.output_dir)
                                                    : std::filesystem::path("out");
  std::error_code ec;
  std::filesystem::create_directories(outcome.output_dir, ec);
  if (ec) throw Error("io-error", "cannot create '" + outcome.output_dir.string() + "': " + ec.message());

  const auto started = std::chrono::steady_clock::now();
  json results;
  switch (config.experiment) {
    case ExperimentKind::privacy_sweep: results = run_privacy_sweep(config, options, outcome); break;
    case ExperimentKind::nvs_context: results = run_nvs_context(config, options, outcome); break;
    case ExperimentKind::schedule: results = run_schedule(config, outcome); break;
    case ExperimentKind::billing_demo: results = run_billing(config, outcome); break;
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  outcome.summary = {{"experiment", to_string(config.experiment)},
                     {"seed", config.seed},
                     {"results", results},
                     {"metadata", {{"wall_time_s", elapsed}}}};
  write_file(outcome.output_dir / "summary.json", dump(outcome.summary), outcome);
  return outcome;
}

}  // namespace coopriv
