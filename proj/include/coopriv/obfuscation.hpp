#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coopriv/geometry.hpp"
#include "coopriv/scene.hpp"

namespace coopriv {

enum class PolicyKind { none, gaussian, fixed_offset, smoothed_random_walk };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);

/// How a sharer forges the pose attached to its frames.
struct ObfuscationPolicy {
  PolicyKind kind{PolicyKind::none};
  double sigma{0.0};       // gaussian: per-axis standard deviation
  double radius{0.0};      // fixed-offset: planar offset length
  double step_sigma{0.0};  // smoothed-random-walk: per-axis increment deviation
  double max_radius{0.0};  // smoothed-random-walk: offset norm bound
  std::uint64_t seed{0};

  /// Throws InvalidParameter for negative or non-finite parameters.
  void validate() const;

  static ObfuscationPolicy none() { return {}; }
  static ObfuscationPolicy gaussian(double sigma, std::uint64_t seed);
  static ObfuscationPolicy fixed_offset(double radius, std::uint64_t seed);
  static ObfuscationPolicy smoothed_random_walk(double step_sigma, double max_radius, std::uint64_t seed);
};

enum class PseudonymMode { constant, rotate_every_k_frames };

struct PseudonymPolicy {
  PseudonymMode mode{PseudonymMode::constant};
  std::uint64_t k{1};
  std::uint64_t seed{0};

  void validate() const;
};

using PseudonymToken = std::uint64_t;

/// Token for sharer `sharer_index` at `frame_index`. Tokens are a keyed
/// bijection of (sharer_index, epoch), so two sharers of one scenario never
/// share a token.
PseudonymToken assign_pseudonym(const PseudonymPolicy& policy, std::uint32_t sharer_index,
                                std::uint64_t frame_index);

/// Pseudonym epoch a frame falls into (0 for constant mode).
std::uint64_t pseudonym_epoch(const PseudonymPolicy& policy, std::uint64_t frame_index);

enum class Priority : std::uint8_t { normal = 0, elevated = 1 };
enum class StackTag : std::uint8_t { open = 0, proprietary = 1 };
enum class SensorKind : std::uint8_t { camera = 0, lidar = 1, radar = 2 };

std::string to_string(Priority p);
std::string to_string(StackTag s);
std::string to_string(SensorKind s);
Priority priority_from_string(const std::string& s);
StackTag stack_tag_from_string(const std::string& s);
SensorKind sensor_kind_from_string(const std::string& s);

struct PayloadDescriptor {
  SensorKind sensor_kind{SensorKind::lidar};
  float nominal_rate{10.0f};
  std::uint32_t size_bytes{0};

  friend bool operator==(const PayloadDescriptor&, const PayloadDescriptor&) = default;
};

/// One obfuscated perception message. Time is carried in integer
/// microseconds, the wire module's resolution.
struct SharedFrame {
  PseudonymToken pseudonym{0};
  std::int64_t t_us{0};
  Pose forged_pose;
  PayloadDescriptor payload;
  Priority priority{Priority::normal};
  StackTag stack_tag{StackTag::open};

  double t() const { return static_cast<double>(t_us) * 1e-6; }

  friend bool operator==(const SharedFrame&, const SharedFrame&) = default;
};

inline std::int64_t to_micros(double seconds) { return std::llround(seconds * 1e6); }

/// Mutable per-sharer policy state. Created once per sharer and threaded
/// through successive forge_pose calls in frame order.
struct SharerState {
  std::uint64_t stream_key{0};
  PseudonymToken pseudonym{0};
  Vec3 offset;
  bool has_offset{false};
  PseudonymToken offset_pseudonym{0};
};

SharerState make_sharer_state(const ObfuscationPolicy& policy, std::uint32_t sharer_index);

/// Forged pose for `true_pose`. `state.pseudonym` must hold the token of the
/// frame being forged; fixed offsets are redrawn when it changes.
Pose forge_pose(const ObfuscationPolicy& policy, const Pose& true_pose, std::uint64_t frame_index,
                SharerState& state);

struct SharerStream {
  std::string vehicle_id;
  std::size_t vehicle_index{0};
  std::vector<SharedFrame> frames;
  /// Scenario sample index each frame was taken from.
  std::vector<std::size_t> sample_indices;
};

struct StreamOptions {
  double share_rate{10.0};
  PayloadDescriptor payload{SensorKind::lidar, 10.0f, 1'200'000};
  Priority priority{Priority::normal};
};

/// Frames every non-ego vehicle shares over the scenario, one per share
/// period at t = k / share_rate for t < duration, each taken from the nearest
/// scenario sample.
std::vector<SharerStream> emit_shared_stream(const Scenario& scenario, const ObfuscationPolicy& policy,
                                             const PseudonymPolicy& pseudonyms, const StreamOptions& options);

}  // namespace coopriv
