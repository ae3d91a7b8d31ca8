#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coopriv/assignment.hpp"
#include "coopriv/obfuscation.hpp"
#include "coopriv/scene.hpp"

namespace coopriv {

struct TrackSample {
  std::int64_t t_us{0};
  Vec3 position;
};

struct InferredTrack {
  std::size_t track_id{0};
  std::vector<TrackSample> samples;
  std::set<PseudonymToken> source_pseudonyms;
  /// Indices into the frame list the track was built from.
  std::vector<std::size_t> frame_indices;
};

struct ObservedTrack {
  std::string vehicle_id;
  std::size_t vehicle_index{0};
  std::vector<TrackSample> samples;
};

enum class TrackerMode { nearest_neighbor, pseudonym };

std::string to_string(TrackerMode mode);
TrackerMode tracker_mode_from_string(const std::string& name);

/// Builds sharer tracks from time-sorted frames. In nearest-neighbor mode,
/// frames of one timestep are associated greedily by ascending distance to
/// each track's last position (ties: lower track id, then earlier frame);
/// a track takes at most one frame per timestep and only within
/// `gate_radius`. Unassociated frames start new tracks. Pseudonym mode keys
/// tracks purely on the frame's pseudonym.
std::vector<InferredTrack> track_shared_frames(const std::vector<SharedFrame>& frames, double gate_radius,
                                               TrackerMode mode = TrackerMode::nearest_neighbor);

/// Ground-truth samples of every non-ego vehicle while it is within
/// `sensing_radius` of the ego. Vehicles never in range are omitted.
std::vector<ObservedTrack> observe_physical(const Scenario& scenario, double sensing_radius);

inline constexpr std::size_t kMinOverlapSamples = 3;

/// Mean time-aligned Euclidean distance between two sample sequences over
/// their shared timestamps; +inf when fewer than kMinOverlapSamples overlap.
double mean_aligned_distance(const std::vector<TrackSample>& a, const std::vector<TrackSample>& b);

CostMatrix build_cost_matrix(const std::vector<InferredTrack>& inferred,
                             const std::vector<ObservedTrack>& observed);

struct MatchedPair {
  std::size_t track_id{0};
  std::optional<std::string> vehicle_id;  // nullopt: unmatched
  double cost{kForbidden};
};

struct AssignmentResult {
  std::vector<MatchedPair> pairs;
  double total_cost{0.0};
  double confusion_rate{0.0};
  /// Pooled over all tracks against each track's majority sharer.
  double rmse{0.0};
  /// Pooled over matched tracks against the matched vehicle; NaN when
  /// nothing was matched.
  double rmse_matched{0.0};
  std::size_t tracks{0};
  std::size_t confused{0};
  std::size_t scored{0};
};

struct PrivacyOptions {
  double sensing_radius{100.0};
  double gate_radius{25.0};
  TrackerMode tracker{TrackerMode::nearest_neighbor};
};

/// Merges per-sharer streams into one time-ordered frame list. `owner`
/// receives, per merged frame, the index of the stream it came from.
std::vector<SharedFrame> merge_streams(const std::vector<SharerStream>& streams,
                                       std::vector<std::size_t>* owner = nullptr);

/// Full attack: track, observe, cost, assign, score.
///
/// A track's true sharer is the sharer contributing most of its frames
/// (ties: lower vehicle index). A sharer is observable when its observed
/// track shares at least kMinOverlapSamples timestamps with its frames. A
/// track is scored when its true sharer is observable or when it was matched
/// at all; it is confused when it is matched to the wrong vehicle or when its
/// observable sharer is left unmatched.
AssignmentResult evaluate_privacy(const Scenario& scenario, const std::vector<SharerStream>& streams,
                                  const PrivacyOptions& options);

}  // namespace coopriv
