#pragma once

#include <limits>
#include <string>
#include <vector>

#include "coopriv/obfuscation.hpp"

namespace coopriv {

struct StackConfig {
  double proprietary_period{0.050};
  /// +inf disables periodic open slots.
  double open_period{0.200};
  double swap_latency{0.0};
  double compute_budget{1.0};
  double e2e_deadline{0.100};
  double proprietary_duration{0.030};
  double open_duration{0.040};

  static constexpr double kNever = std::numeric_limits<double>::infinity();
};

struct ConfigViolation {
  std::string field;
  std::string message;
};

/// Static checks on a StackConfig that do not need a timeline. All
/// violations are returned.
std::vector<ConfigViolation> check_stack_config(const StackConfig& config);

struct DemandRequest {
  double t{0.0};
  std::string recipient_id;
  Priority priority{Priority::normal};
};

struct ScheduleSlot {
  double start{0.0};
  double duration{0.0};
  StackTag stack{StackTag::proprietary};
  double swap_overhead_before{0.0};

  double completion() const { return start + swap_overhead_before + duration; }
};

struct ServedRequest {
  std::string recipient_id;
  Priority priority{Priority::normal};
  double t_request{0.0};
};

struct FrameRecord {
  double t_produced{0.0};
  StackTag stack{StackTag::proprietary};
  std::vector<ServedRequest> served_requests;
  /// Longest wait of a served request (request to frame completion); the
  /// slot's own processing time when it served nobody.
  double e2e_latency{0.0};
};

using FrameLedger = std::vector<FrameRecord>;

struct Timeline {
  StackConfig config;
  double horizon{0.0};
  std::vector<ScheduleSlot> slots;
  FrameLedger ledger;
  /// Requests whose time falls after the last open slot.
  std::vector<DemandRequest> unserved;
};

/// Duty-cycled single-sensor schedule. Every proprietary_period a grid slot
/// runs one stack: open when the slot start is a multiple of open_period or
/// when an elevated demand arrived since the previous grid point, proprietary
/// otherwise. Switching stacks costs swap_latency before the slot. Throws
/// InfeasibleConfig naming the first violated constraint.
Timeline build_timeline(const StackConfig& config, const std::vector<DemandRequest>& demands, double horizon);

struct EffectiveRates {
  double proprietary_hz{0.0};
  double open_hz{0.0};
  std::size_t swap_count{0};
  double utilization{0.0};
};

EffectiveRates effective_rates(const Timeline& timeline);

struct LatencyResult {
  double latency{0.0};
  bool deadline_met{false};
  std::size_t slot_index{0};
};

/// Time from `request.t` until the first open slot starting at or after it
/// completes, plus `network_delay`. Throws NoOpenSlot when there is none.
LatencyResult e2e_latency(const Timeline& timeline, const DemandRequest& request, double network_delay);

std::string timeline_csv_header();
std::string timeline_csv_row(const ScheduleSlot& slot);

}  // namespace coopriv
