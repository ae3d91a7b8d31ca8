#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "coopriv/billing.hpp"
#include "coopriv/error.hpp"
#include "coopriv/nvs.hpp"
#include "coopriv/scheduler.hpp"
#include "coopriv/sweep.hpp"

namespace coopriv {

enum class ExperimentKind { privacy_sweep, nvs_context, schedule, billing_demo };

std::string to_string(ExperimentKind kind);

struct NvsStudyConfig {
  CameraIntrinsics intrinsics{64.0, 64.0, 64.0, 48.0, 128, 96};
  double corridor_length{60.0};
  double corridor_half_width{4.0};
  double corridor_height{4.0};
  double spacing{0.025};
  std::size_t frames{8};
  double step{0.5};
  std::vector<double> offsets{2.0};
  std::vector<std::size_t> contexts{1, 2, 4, 8};
  double mask_fraction{0.0};
};

struct DemandSpec {
  std::size_t count{40};
  double elevated_fraction{0.2};
  std::vector<std::string> recipients{"recipient-0", "recipient-1", "recipient-2"};
};

struct ScheduleStudyConfig {
  StackConfig stack;
  double horizon{10.0};
  double network_delay{0.010};
  DemandSpec demands;
};

struct BillingStudyConfig {
  Tariff tariff{100, 2.0, 500};
  std::size_t sharers{3};
  std::vector<std::string> recipients{"recipient-0", "recipient-1", "recipient-2", "recipient-3"};
  std::size_t requests_per_recipient{20};
  double elevated_fraction{0.25};
};

struct ExperimentConfig {
  ExperimentKind experiment{ExperimentKind::privacy_sweep};
  std::uint64_t seed{1};
  std::string output_dir{"out"};
  std::string import_csv;  // optional trajectory CSV for privacy-sweep
  SweepConfig sweep;
  NvsStudyConfig nvs;
  ScheduleStudyConfig schedule;
  BillingStudyConfig billing;
};

struct Violation {
  std::string field;
  std::string message;
};

/// Thrown when the config is not well-formed (bad JSON, wrong types,
/// unknown enumerations).
class ConfigParseError : public Error {
 public:
  ConfigParseError(std::string field, const std::string& message)
      : Error("config-parse", field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Thrown by run_experiment when constraints are violated.
class ConstraintViolation : public Error {
 public:
  explicit ConstraintViolation(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Applies `key=value` overrides addressed by dotted paths. The value is
/// parsed as JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& config, const std::string& assignment);

nlohmann::json load_config_json(const std::filesystem::path& path);

/// Parses a config document; throws ConfigParseError for structural
/// problems. Constraint checks are done by validate_config.
ExperimentConfig parse_config(const nlohmann::json& config);

/// Every constraint violation in the config, not just the first. Parse errors
/// are reported as violations too.
std::vector<Violation> validate_config(const nlohmann::json& config);

struct RunOptions {
  std::filesystem::path output_dir;  // empty: take from the config
  int jobs{0};
};

struct RunOutcome {
  std::filesystem::path output_dir;
  std::vector<std::filesystem::path> files;
  nlohmann::json summary;
};

/// Runs the configured experiment and writes results.csv, summary.json and
/// plot.svg (plus experiment-specific extras) into the output directory.
RunOutcome run_experiment(const nlohmann::json& config, const RunOptions& options);

/// Demand requests drawn uniformly over [0, horizon), time-sorted.
std::vector<DemandRequest> generate_demands(const DemandSpec& spec, double horizon, std::uint64_t seed);

}  // namespace coopriv
