#include "coopriv/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "coopriv/error.hpp"
#include "coopriv/format.hpp"

namespace coopriv {

namespace {
constexpr double kTimeEps = 1e-9;

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }
}  // namespace

std::vector<ConfigViolation> check_stack_config(const StackConfig& c) {
  std::vector<ConfigViolation> out;
  if (!positive_finite(c.proprietary_period))
    out.push_back({"proprietary_period", "must be positive and finite"});
  if (!(c.open_period > 0.0)) out.push_back({"open_period", "must be positive (or infinite to disable)"});
  else if (positive_finite(c.proprietary_period) && c.open_period < c.proprietary_period)
    out.push_back({"open_period", "must be >= proprietary_period"});
  if (!(c.swap_latency >= 0.0) || !std::isfinite(c.swap_latency))
    out.push_back({"swap_latency", "must be finite and >= 0"});
  if (!(c.compute_budget > 0.0 && c.compute_budget <= 1.0))
    out.push_back({"compute_budget", "must be in (0, 1]"});
  if (!positive_finite(c.e2e_deadline)) out.push_back({"e2e_deadline", "must be positive and finite"});
  if (!positive_finite(c.proprietary_duration))
    out.push_back({"proprietary_duration", "must be positive and finite"});
  if (!positive_finite(c.open_duration)) out.push_back({"open_duration", "must be positive and finite"});
  return out;
}

Timeline build_timeline(const StackConfig& config, const std::vector<DemandRequest>& demands, double horizon) {
  if (const auto violations = check_stack_config(config); !violations.empty())
    throw InfeasibleConfig(violations.front().field, violations.front().message);
  if (!positive_finite(horizon)) throw InvalidParameter("horizon must be positive");
  for (std::size_t i = 1; i < demands.size(); ++i)
    if (demands[i].t < demands[i - 1].t) throw InvalidParameter("demands must be sorted by time");

  const double grid = config.proprietary_period;
  const auto n_slots = static_cast<std::size_t>(std::ceil(horizon / grid - kTimeEps));

  std::vector<char> open(n_slots, 0);
  if (std::isfinite(config.open_period)) {
    for (std::size_t k = 0; k < n_slots; ++k) {
      const double ratio = static_cast<double>(k) * grid / config.open_period;
      if (std::abs(ratio - std::round(ratio)) < kTimeEps) open[k] = 1;
    }
  }
  for (const auto& d : demands) {
    if (d.priority != Priority::elevated) continue;
    const auto k = static_cast<std::size_t>(std::max(0.0, std::ceil(d.t / grid - kTimeEps)));
    if (k < n_slots) open[k] = 1;
  }

  Timeline timeline;
  timeline.config = config;
  timeline.horizon = horizon;
  timeline.slots.reserve(n_slots);
  for (std::size_t k = 0; k < n_slots; ++k) {
    ScheduleSlot slot;
    slot.start = static_cast<double>(k) * grid;
    slot.stack = open[k] ? StackTag::open : StackTag::proprietary;
    slot.duration = open[k] ? config.open_duration : config.proprietary_duration;
    slot.swap_overhead_before = (k > 0 && timeline.slots.back().stack != slot.stack) ? config.swap_latency : 0.0;
    if (slot.swap_overhead_before + slot.duration > grid + kTimeEps)
      throw InfeasibleConfig("slot_deadline", "slot at t=" + format_number(slot.start) + " needs " +
                                                  format_number(slot.swap_overhead_before + slot.duration) +
                                                  " s but the grid period is " + format_number(grid) + " s");
    timeline.slots.push_back(slot);
  }

  const EffectiveRates rates = effective_rates(timeline);
  if (rates.utilization > config.compute_budget + kTimeEps)
    throw InfeasibleConfig("compute_budget", "utilization " + format_number(rates.utilization) +
                                                 " exceeds the budget " + format_number(config.compute_budget));

  timeline.ledger.reserve(n_slots);
  for (const auto& slot : timeline.slots)
    timeline.ledger.push_back({slot.completion(), slot.stack, {}, slot.swap_overhead_before + slot.duration});

  std::size_t next_open = 0;
  for (const auto& d : demands) {
    while (next_open < n_slots &&
           (timeline.slots[next_open].stack != StackTag::open || timeline.slots[next_open].start < d.t - kTimeEps))
      ++next_open;
    if (next_open == n_slots) {
      timeline.unserved.push_back(d);
      continue;
    }
    FrameRecord& frame = timeline.ledger[next_open];
    const double wait = frame.t_produced - d.t;
    if (frame.served_requests.empty()) frame.e2e_latency = wait;
    else frame.e2e_latency = std::max(frame.e2e_latency, wait);
    frame.served_requests.push_back({d.recipient_id, d.priority, d.t});
  }
  return timeline;
}

EffectiveRates effective_rates(const Timeline& timeline) {
  if (timeline.slots.empty() || !(timeline.horizon > 0.0)) throw InvalidParameter("timeline is empty");
  EffectiveRates rates;
  std::size_t open = 0, proprietary = 0;
  double busy = 0.0;
  for (std::size_t i = 0; i < timeline.slots.size(); ++i) {
    const auto& s = timeline.slots[i];
    (s.stack == StackTag::open ? open : proprietary) += 1;
    if (i > 0 && timeline.slots[i - 1].stack != s.stack) ++rates.swap_count;
    busy += s.duration + s.swap_overhead_before;
  }
  rates.open_hz = static_cast<double>(open) / timeline.horizon;
  rates.proprietary_hz = static_cast<double>(proprietary) / timeline.horizon;
  rates.utilization = busy / timeline.horizon;
  return rates;
}

LatencyResult e2e_latency(const Timeline& timeline, const DemandRequest& request, double network_delay) {
  if (!(network_delay >= 0.0)) throw InvalidParameter("network_delay must be >= 0");
  if (!(request.t >= 0.0 && request.t <= timeline.horizon)) throw InvalidParameter("request outside the horizon");
  for (std::size_t i = 0; i < timeline.slots.size(); ++i) {
    const auto& s = timeline.slots[i];
    if (s.stack != StackTag::open || s.start < request.t - kTimeEps) continue;
    LatencyResult r;
    r.latency = s.completion() - request.t + network_delay;
    r.deadline_met = r.latency <= timeline.config.e2e_deadline;
    r.slot_index = i;
    return r;
  }
  throw NoOpenSlot("no open slot at or after t=" + format_number(request.t));
}

std::string timeline_csv_header() { return "start,duration,stack,overhead"; }

std::string timeline_csv_row(const ScheduleSlot& slot) {
  return format_number(slot.start) + "," + format_number(slot.duration) + "," + to_string(slot.stack) + "," +
         format_number(slot.swap_overhead_before);
}

}  // namespace coopriv
