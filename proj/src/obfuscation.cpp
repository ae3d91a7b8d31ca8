#include "coopriv/obfuscation.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "coopriv/error.hpp"
#include "coopriv/random.hpp"

namespace coopriv {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::none: return "none";
    case PolicyKind::gaussian: return "gaussian";
    case PolicyKind::fixed_offset: return "fixed-offset";
    case PolicyKind::smoothed_random_walk: return "smoothed-random-walk";
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "none") return PolicyKind::none;
  if (name == "gaussian") return PolicyKind::gaussian;
  if (name == "fixed-offset") return PolicyKind::fixed_offset;
  if (name == "smoothed-random-walk") return PolicyKind::smoothed_random_walk;
  throw InvalidParameter("unknown obfuscation policy '" + name + "'");
}

namespace {
void require_non_negative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw InvalidParameter(std::string("ObfuscationPolicy.") + name + " must be finite and >= 0");
}
}  // namespace

void ObfuscationPolicy::validate() const {
  require_non_negative(sigma, "sigma");
  require_non_negative(radius, "radius");
  require_non_negative(step_sigma, "step_sigma");
  require_non_negative(max_radius, "max_radius");
}

ObfuscationPolicy ObfuscationPolicy::gaussian(double sigma, std::uint64_t seed) {
  ObfuscationPolicy p{PolicyKind::gaussian, sigma, 0.0, 0.0, 0.0, seed};
  p.validate();
  return p;
}

ObfuscationPolicy ObfuscationPolicy::fixed_offset(double radius, std::uint64_t seed) {
  ObfuscationPolicy p{PolicyKind::fixed_offset, 0.0, radius, 0.0, 0.0, seed};
  p.validate();
  return p;
}

ObfuscationPolicy ObfuscationPolicy::smoothed_random_walk(double step_sigma, double max_radius,
                                                          std::uint64_t seed) {
  ObfuscationPolicy p{PolicyKind::smoothed_random_walk, 0.0, 0.0, step_sigma, max_radius, seed};
  p.validate();
  return p;
}

void PseudonymPolicy::validate() const {
  if (mode == PseudonymMode::rotate_every_k_frames && k < 1)
    throw InvalidParameter("PseudonymPolicy.k must be >= 1");
}

std::uint64_t pseudonym_epoch(const PseudonymPolicy& policy, std::uint64_t frame_index) {
  return policy.mode == PseudonymMode::constant ? 0 : frame_index / policy.k;
}

PseudonymToken assign_pseudonym(const PseudonymPolicy& policy, std::uint32_t sharer_index,
                                std::uint64_t frame_index) {
  const std::uint64_t epoch = pseudonym_epoch(policy, frame_index);
  const std::uint64_t key = mix64(policy.seed ^ 0x7073657564306e79ULL);
  // (sharer, epoch) packs injectively while epoch < 2^32; xor with a key and
  // mix64 are both bijections.
  const std::uint64_t packed = (static_cast<std::uint64_t>(sharer_index) << 32) | (epoch & 0xffffffffULL);
  return mix64(packed ^ key);
}

std::string to_string(Priority p) { return p == Priority::elevated ? "elevated" : "normal"; }
std::string to_string(StackTag s) { return s == StackTag::open ? "open" : "proprietary"; }
std::string to_string(SensorKind s) {
  switch (s) {
    case SensorKind::camera: return "camera";
    case SensorKind::lidar: return "lidar";
    case SensorKind::radar: return "radar";
  }
  return "unknown";
}

Priority priority_from_string(const std::string& s) {
  if (s == "normal") return Priority::normal;
  if (s == "elevated") return Priority::elevated;
  throw InvalidParameter("unknown priority '" + s + "'");
}

StackTag stack_tag_from_string(const std::string& s) {
  if (s == "open") return StackTag::open;
  if (s == "proprietary") return StackTag::proprietary;
  throw InvalidParameter("unknown stack tag '" + s + "'");
}

SensorKind sensor_kind_from_string(const std::string& s) {
  if (s == "camera") return SensorKind::camera;
  if (s == "lidar") return SensorKind::lidar;
  if (s == "radar") return SensorKind::radar;
  throw InvalidParameter("unknown sensor kind '" + s + "'");
}

SharerState make_sharer_state(const ObfuscationPolicy& policy, std::uint32_t sharer_index) {
  SharerState state;
  state.stream_key = derive_seed(policy.seed, sharer_index, 0x0bf05ca7eULL);
  return state;
}

Pose forge_pose(const ObfuscationPolicy& policy, const Pose& true_pose, std::uint64_t frame_index,
                SharerState& state) {
  Pose forged = true_pose;
  switch (policy.kind) {
    case PolicyKind::none:
      break;
    case PolicyKind::gaussian: {
      if (policy.sigma == 0.0) break;
      SplitMix64 rng(hash_combine(state.stream_key, frame_index));
      std::normal_distribution<double> noise(0.0, policy.sigma);
      forged.x += noise(rng);
      forged.y += noise(rng);
      break;
    }
    case PolicyKind::fixed_offset: {
      if (!state.has_offset || state.offset_pseudonym != state.pseudonym) {
        SplitMix64 rng(hash_combine(state.stream_key, state.pseudonym));
        std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
        const double theta = angle(rng);
        state.offset = {policy.radius * std::cos(theta), policy.radius * std::sin(theta), 0.0};
        state.has_offset = true;
        state.offset_pseudonym = state.pseudonym;
      }
      forged.x += state.offset.x;
      forged.y += state.offset.y;
      break;
    }
    case PolicyKind::smoothed_random_walk: {
      SplitMix64 rng(hash_combine(state.stream_key, frame_index));
      if (policy.step_sigma > 0.0) {
        std::normal_distribution<double> step(0.0, policy.step_sigma);
        state.offset.x += step(rng);
        state.offset.y += step(rng);
      }
      const double r = std::hypot(state.offset.x, state.offset.y);
      if (r > policy.max_radius) {
        const double scale = r > 0.0 ? policy.max_radius / r : 0.0;
        state.offset.x *= scale;
        state.offset.y *= scale;
      }
      state.has_offset = true;
      forged.x += state.offset.x;
      forged.y += state.offset.y;
      break;
    }
  }
  return forged;
}

std::vector<SharerStream> emit_shared_stream(const Scenario& scenario, const ObfuscationPolicy& policy,
                                             const PseudonymPolicy& pseudonyms, const StreamOptions& options) {
  policy.validate();
  pseudonyms.validate();
  if (!(options.share_rate > 0.0) || !std::isfinite(options.share_rate))
    throw InvalidParameter("share_rate must be positive");
  const std::size_t ego = scenario.ego_index();
  const std::size_t n_samples = scenario.sample_count();

  const double exact = scenario.duration * options.share_rate;
  auto n_frames = static_cast<std::size_t>(std::floor(exact));
  if (std::abs(exact - std::round(exact)) < 1e-9) n_frames = static_cast<std::size_t>(std::llround(exact));

  std::vector<SharerStream> streams;
  for (std::size_t v = 0; v < scenario.trajectories.size(); ++v) {
    if (v == ego) continue;
    const auto& trajectory = scenario.trajectories[v];
    SharerStream stream{trajectory.vehicle_id, v, {}, {}};
    stream.frames.reserve(n_frames);
    stream.sample_indices.reserve(n_frames);
    SharerState state = make_sharer_state(policy, static_cast<std::uint32_t>(v));
    for (std::size_t k = 0; k < n_frames; ++k) {
      const double t = static_cast<double>(k) / options.share_rate;
      const auto sample = std::min<std::size_t>(static_cast<std::size_t>(std::llround(t / scenario.dt)),
                                                n_samples - 1);
      state.pseudonym = assign_pseudonym(pseudonyms, static_cast<std::uint32_t>(v), k);
      SharedFrame frame;
      frame.pseudonym = state.pseudonym;
      frame.t_us = to_micros(static_cast<double>(sample) * scenario.dt);
      frame.forged_pose = forge_pose(policy, trajectory.poses[sample], k, state);
      frame.payload = options.payload;
      frame.priority = options.priority;
      frame.stack_tag = StackTag::open;
      stream.frames.push_back(frame);
      stream.sample_indices.push_back(sample);
    }
    streams.push_back(std::move(stream));
  }
  return streams;
}

}  // namespace coopriv
