#include "coopriv/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "coopriv/error.hpp"

namespace coopriv {

std::string to_string(TrackerMode mode) {
  return mode == TrackerMode::pseudonym ? "pseudonym" : "nearest-neighbor";
}

TrackerMode tracker_mode_from_string(const std::string& name) {
  if (name == "nearest-neighbor") return TrackerMode::nearest_neighbor;
  if (name == "pseudonym") return TrackerMode::pseudonym;
  throw InvalidParameter("unknown tracker mode '" + name + "'");
}

namespace {

void append_sample(InferredTrack& track, const SharedFrame& frame, std::size_t index) {
  track.samples.push_back({frame.t_us, frame.forged_pose.position()});
  track.source_pseudonyms.insert(frame.pseudonym);
  track.frame_indices.push_back(index);
}

std::vector<InferredTrack> track_by_pseudonym(const std::vector<SharedFrame>& frames) {
  std::vector<InferredTrack> tracks;
  std::map<PseudonymToken, std::size_t> by_token;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    auto [it, inserted] = by_token.try_emplace(frames[i].pseudonym, tracks.size());
    if (inserted) tracks.push_back(InferredTrack{tracks.size(), {}, {}, {}});
    InferredTrack& track = tracks[it->second];
    // Duplicate timestamps under one pseudonym keep the first frame.
    if (!track.samples.empty() && track.samples.back().t_us >= frames[i].t_us) continue;
    append_sample(track, frames[i], i);
  }
  return tracks;
}

}  // namespace

std::vector<InferredTrack> track_shared_frames(const std::vector<SharedFrame>& frames, double gate_radius,
                                               TrackerMode mode) {
  if (!(gate_radius >= 0.0)) throw InvalidParameter("gate_radius must be >= 0");
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].t_us < frames[i - 1].t_us) throw InvalidParameter("frames must be sorted by time");
  }
  if (mode == TrackerMode::pseudonym) return track_by_pseudonym(frames);

  std::vector<InferredTrack> tracks;
  struct Candidate {
    double distance;
    std::size_t track;
    std::size_t frame;
  };
  std::vector<Candidate> candidates;
  std::vector<char> frame_taken;
  std::vector<char> track_taken;

  std::size_t begin = 0;
  while (begin < frames.size()) {
    std::size_t end = begin;
    while (end < frames.size() && frames[end].t_us == frames[begin].t_us) ++end;

    candidates.clear();
    for (std::size_t f = begin; f < end; ++f) {
      const Vec3 p = frames[f].forged_pose.position();
      for (std::size_t k = 0; k < tracks.size(); ++k) {
        const double d = distance(tracks[k].samples.back().position, p);
        if (d <= gate_radius) candidates.push_back({d, k, f});
      }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      return std::tie(a.distance, a.track, a.frame) < std::tie(b.distance, b.track, b.frame);
    });

    frame_taken.assign(end - begin, 0);
    track_taken.assign(tracks.size(), 0);
    for (const auto& c : candidates) {
      if (frame_taken[c.frame - begin] || track_taken[c.track]) continue;
      frame_taken[c.frame - begin] = 1;
      track_taken[c.track] = 1;
      append_sample(tracks[c.track], frames[c.frame], c.frame);
    }
    for (std::size_t f = begin; f < end; ++f) {
      if (frame_taken[f - begin]) continue;
      tracks.push_back(InferredTrack{tracks.size(), {}, {}, {}});
      append_sample(tracks.back(), frames[f], f);
    }
    begin = end;
  }
  return tracks;
}

std::vector<ObservedTrack> observe_physical(const Scenario& scenario, double sensing_radius) {
  if (!(sensing_radius > 0.0)) throw InvalidParameter("sensing_radius must be > 0");
  const std::size_t ego = scenario.ego_index();
  const auto& ego_poses = scenario.trajectories[ego].poses;
  std::vector<ObservedTrack> tracks;
  for (std::size_t v = 0; v < scenario.trajectories.size(); ++v) {
    if (v == ego) continue;
    const auto& trajectory = scenario.trajectories[v];
    ObservedTrack track{trajectory.vehicle_id, v, {}};
    for (std::size_t i = 0; i < trajectory.poses.size(); ++i) {
      const Vec3 p = trajectory.poses[i].position();
      if (distance(p, ego_poses[i].position()) <= sensing_radius)
        track.samples.push_back({to_micros(static_cast<double>(i) * scenario.dt), p});
    }
    if (!track.samples.empty()) tracks.push_back(std::move(track));
  }
  return tracks;
}

double mean_aligned_distance(const std::vector<TrackSample>& a, const std::vector<TrackSample>& b) {
  std::size_t i = 0, j = 0, overlap = 0;
  double sum = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i].t_us < b[j].t_us) {
      ++i;
    } else if (b[j].t_us < a[i].t_us) {
      ++j;
    } else {
      sum += distance(a[i].position, b[j].position);
      ++overlap;
      ++i;
      ++j;
    }
  }
  if (overlap < kMinOverlapSamples) return kForbidden;
  return sum / static_cast<double>(overlap);
}

CostMatrix build_cost_matrix(const std::vector<InferredTrack>& inferred,
                             const std::vector<ObservedTrack>& observed) {
  CostMatrix costs(inferred.size(), observed.size());
  for (std::size_t i = 0; i < inferred.size(); ++i) {
    // A track shorter than the overlap minimum can never be matched.
    if (inferred[i].samples.size() < kMinOverlapSamples) continue;
    for (std::size_t j = 0; j < observed.size(); ++j)
      costs(i, j) = mean_aligned_distance(inferred[i].samples, observed[j].samples);
  }
  return costs;
}

std::vector<SharedFrame> merge_streams(const std::vector<SharerStream>& streams, std::vector<std::size_t>* owner) {
  struct Ref {
    std::int64_t t_us;
    std::size_t stream;
    std::size_t frame;
  };
  std::vector<Ref> refs;
  for (std::size_t s = 0; s < streams.size(); ++s)
    for (std::size_t f = 0; f < streams[s].frames.size(); ++f) refs.push_back({streams[s].frames[f].t_us, s, f});
  std::stable_sort(refs.begin(), refs.end(), [](const Ref& a, const Ref& b) {
    return std::tie(a.t_us, a.stream, a.frame) < std::tie(b.t_us, b.stream, b.frame);
  });
  std::vector<SharedFrame> merged;
  merged.reserve(refs.size());
  if (owner) {
    owner->clear();
    owner->reserve(refs.size());
  }
  for (const auto& r : refs) {
    merged.push_back(streams[r.stream].frames[r.frame]);
    if (owner) owner->push_back(r.stream);
  }
  return merged;
}

AssignmentResult evaluate_privacy(const Scenario& scenario, const std::vector<SharerStream>& streams,
                                  const PrivacyOptions& options) {
  std::vector<std::size_t> owner;
  const auto frames = merge_streams(streams, &owner);
  const auto tracks = track_shared_frames(frames, options.gate_radius, options.tracker);
  const auto observed = observe_physical(scenario, options.sensing_radius);
  if (observed.empty()) throw DegenerateScenario("no sharer is ever within sensing range of the ego");

  // vehicle index -> position in `observed`
  std::map<std::size_t, std::size_t> observed_of_vehicle;
  for (std::size_t j = 0; j < observed.size(); ++j) observed_of_vehicle[observed[j].vehicle_index] = j;

  // Observable sharers: enough observed samples at the instants they shared.
  std::vector<char> observable(streams.size(), 0);
  for (std::size_t s = 0; s < streams.size(); ++s) {
    auto it = observed_of_vehicle.find(streams[s].vehicle_index);
    if (it == observed_of_vehicle.end()) continue;
    std::vector<TrackSample> shared;
    for (const auto& f : streams[s].frames) shared.push_back({f.t_us, {}});
    std::size_t overlap = 0;
    std::size_t i = 0, j = 0;
    const auto& obs = observed[it->second].samples;
    while (i < shared.size() && j < obs.size()) {
      if (shared[i].t_us < obs[j].t_us) ++i;
      else if (obs[j].t_us < shared[i].t_us) ++j;
      else { ++overlap; ++i; ++j; }
    }
    observable[s] = overlap >= kMinOverlapSamples;
  }

  const CostMatrix costs = build_cost_matrix(tracks, observed);
  const Assignment assignment = hungarian_assign(costs);

  AssignmentResult result;
  result.total_cost = assignment.total_cost;
  result.tracks = tracks.size();

  const double dt = scenario.dt;
  auto true_position = [&](std::size_t vehicle, std::int64_t t_us) {
    const auto& poses = scenario.trajectories[vehicle].poses;
    const auto i = std::min<std::size_t>(
        static_cast<std::size_t>(std::llround(static_cast<double>(t_us) * 1e-6 / dt)), poses.size() - 1);
    return poses[i].position();
  };

  double sq_sum = 0.0, sq_matched = 0.0;
  std::size_t sq_count = 0, matched_count = 0;
  std::vector<std::size_t> votes(streams.size());
  for (std::size_t k = 0; k < tracks.size(); ++k) {
    const auto& track = tracks[k];
    std::fill(votes.begin(), votes.end(), 0);
    for (std::size_t f : track.frame_indices) ++votes[owner[f]];
    const std::size_t sharer =
        static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    const std::size_t sharer_vehicle = streams[sharer].vehicle_index;

    for (const auto& sample : track.samples) {
      const Vec3 d = sample.position - true_position(sharer_vehicle, sample.t_us);
      sq_sum += dot(d, d);
      ++sq_count;
    }

    MatchedPair pair{track.track_id, std::nullopt, kForbidden};
    std::optional<std::size_t> matched_vehicle;
    if (const auto col = assignment.row_to_col[k]) {
      pair.vehicle_id = observed[*col].vehicle_id;
      pair.cost = costs(k, *col);
      matched_vehicle = observed[*col].vehicle_index;
      for (const auto& sample : track.samples) {
        const Vec3 d = sample.position - true_position(*matched_vehicle, sample.t_us);
        sq_matched += dot(d, d);
        ++matched_count;
      }
    }
    result.pairs.push_back(std::move(pair));

    if (observable[sharer]) {
      ++result.scored;
      if (!matched_vehicle || *matched_vehicle != sharer_vehicle) ++result.confused;
    } else if (matched_vehicle) {
      ++result.scored;
      ++result.confused;
    }
  }
  result.confusion_rate =
      result.scored == 0 ? 0.0 : static_cast<double>(result.confused) / static_cast<double>(result.scored);
  result.rmse = sq_count == 0 ? 0.0 : std::sqrt(sq_sum / static_cast<double>(sq_count));
  result.rmse_matched = matched_count == 0 ? std::numeric_limits<double>::quiet_NaN()
                                           : std::sqrt(sq_matched / static_cast<double>(matched_count));
  return result;
}

}  // namespace coopriv
