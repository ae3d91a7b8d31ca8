#include <doctest.h>

#include <cmath>
#include <set>

#include "coopriv/error.hpp"
#include "coopriv/obfuscation.hpp"

using namespace coopriv;

namespace {

Scenario line_scenario(int sharers, double duration, double dt) {
  Scenario s;
  s.scenario_id = "test";
  s.duration = duration;
  s.dt = dt;
  for (int v = 0; v <= sharers; ++v)
    s.trajectories.push_back(constant_velocity_trajectory(make_pose(0, 10.0 * v, 0, 0), 5.0 + v, duration, dt,
                                                          "v" + std::to_string(v)));
  s.ego_id = "v0";
  return s;
}

}  // namespace

TEST_SUITE("obfuscation") {

TEST_CASE("none and zero-sigma gaussian leave the pose untouched") {
  const Pose p = make_pose(3, 4, 1, 0.3);
  for (const auto& policy : {ObfuscationPolicy::none(), ObfuscationPolicy::gaussian(0.0, 5)}) {
    SharerState st = make_sharer_state(policy, 0);
    for (std::uint64_t f = 0; f < 20; ++f) CHECK(forge_pose(policy, p, f, st) == p);
  }
}

TEST_CASE("gaussian forging statistics (Monte Carlo oracle)") {
  for (double sigma : {4.0, 12.0}) {
    const auto policy = ObfuscationPolicy::gaussian(sigma, 1234);
    SharerState st = make_sharer_state(policy, 3);
    const Pose truth = make_pose(10, -20, 1.5, 0.7);
    const int n = 100000;
    double sx = 0, sy = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
      const Pose f = forge_pose(policy, truth, static_cast<std::uint64_t>(i), st);
      CHECK_EQ(f.z, truth.z);
      CHECK_EQ(f.heading, truth.heading);
      const double dx = f.x - truth.x, dy = f.y - truth.y;
      sx += dx;
      sy += dy;
      sq += dx * dx + dy * dy;
    }
    const double rms = std::sqrt(sq / n);
    CHECK(std::abs(rms - sigma * std::sqrt(2.0)) <= 0.02 * sigma * std::sqrt(2.0));
    CHECK(std::abs(sx / n) <= 0.05 * sigma);
    CHECK(std::abs(sy / n) <= 0.05 * sigma);
  }
}

TEST_CASE("fixed offset lies exactly at the radius and is held per pseudonym") {
  const auto policy = ObfuscationPolicy::fixed_offset(12.0, 9);
  SharerState st = make_sharer_state(policy, 1);
  const Pose origin{};
  PseudonymPolicy rot{PseudonymMode::rotate_every_k_frames, 5, 9};
  std::set<std::pair<double, double>> offsets;
  for (std::uint64_t f = 0; f < 20; ++f) {
    st.pseudonym = assign_pseudonym(rot, 1, f);
    const Pose forged = forge_pose(policy, origin, f, st);
    CHECK(std::hypot(forged.x, forged.y) == doctest::Approx(12.0).epsilon(1e-12));
    offsets.insert({forged.x, forged.y});
  }
  CHECK(offsets.size() == 4);  // one theta per pseudonym epoch
}

TEST_CASE("smoothed random walk stays within max_radius on every frame") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto policy = ObfuscationPolicy::smoothed_random_walk(3.0, 8.0, seed);
    SharerState st = make_sharer_state(policy, static_cast<std::uint32_t>(seed));
    const Pose truth = make_pose(-5, 7, 0, 1.0);
    double prev_x = truth.x, prev_y = truth.y;
    for (std::uint64_t f = 0; f < 2000; ++f) {
      const Pose forged = forge_pose(policy, truth, f, st);
      CHECK(std::hypot(forged.x - truth.x, forged.y - truth.y) <= 8.0 + 1e-9);
      if (f > 0) CHECK(std::hypot(forged.x - prev_x, forged.y - prev_y) < 3.0 * 8);
      prev_x = forged.x;
      prev_y = forged.y;
    }
  }
}

TEST_CASE("policy validation") {
  CHECK_THROWS_AS(ObfuscationPolicy::gaussian(-1.0, 0), InvalidParameter);
  CHECK_THROWS_AS(ObfuscationPolicy::fixed_offset(std::nan(""), 0), InvalidParameter);
  CHECK_THROWS_AS(ObfuscationPolicy::smoothed_random_walk(1.0, -2.0, 0), InvalidParameter);
  CHECK_THROWS_AS((PseudonymPolicy{PseudonymMode::rotate_every_k_frames, 0, 0}.validate()), InvalidParameter);
  CHECK(policy_kind_from_string("smoothed-random-walk") == PolicyKind::smoothed_random_walk);
  CHECK_THROWS_AS(policy_kind_from_string("laplace"), InvalidParameter);
}

TEST_CASE("pseudonym assignment") {
  SUBCASE("constant mode: one token over 100 frames") {
    PseudonymPolicy p{PseudonymMode::constant, 1, 42};
    std::set<PseudonymToken> tokens;
    for (std::uint64_t f = 0; f < 100; ++f) tokens.insert(assign_pseudonym(p, 0, f));
    CHECK(tokens.size() == 1);
  }
  SUBCASE("rotation every 10 frames: 3 tokens over 30 frames, changing exactly at multiples of k") {
    PseudonymPolicy p{PseudonymMode::rotate_every_k_frames, 10, 42};
    std::set<PseudonymToken> tokens;
    for (std::uint64_t f = 0; f < 30; ++f) {
      tokens.insert(assign_pseudonym(p, 0, f));
      if (f > 0) CHECK((assign_pseudonym(p, 0, f) != assign_pseudonym(p, 0, f - 1)) == (f % 10 == 0));
    }
    CHECK(tokens.size() == 3);
  }
  SUBCASE("no collisions across sharers") {
    for (auto mode : {PseudonymMode::constant, PseudonymMode::rotate_every_k_frames}) {
      PseudonymPolicy p{mode, 3, 7};
      std::set<PseudonymToken> tokens;
      std::size_t count = 0;
      for (std::uint32_t s = 0; s < 64; ++s)
        for (std::uint64_t f = 0; f < 60; f += (mode == PseudonymMode::constant ? 60 : 3)) {
          tokens.insert(assign_pseudonym(p, s, f));
          ++count;
        }
      CHECK(tokens.size() == count);
    }
  }
}

TEST_CASE("emit_shared_stream counts and ordering") {
  const Scenario s = line_scenario(3, 10.0, 0.1);
  StreamOptions opt;
  opt.share_rate = 10.0;
  const auto streams = emit_shared_stream(s, ObfuscationPolicy::none(), {}, opt);
  REQUIRE(streams.size() == 3);
  for (const auto& st : streams) {
    CHECK(st.vehicle_id != s.ego_id);
    CHECK(st.frames.size() == 100);
    for (std::size_t i = 1; i < st.frames.size(); ++i) CHECK(st.frames[i].t_us > st.frames[i - 1].t_us);
  }
}

TEST_CASE("5 Hz sharing on 0.1 s samples takes every second sample") {
  const Scenario s = line_scenario(2, 10.0, 0.1);
  StreamOptions opt;
  opt.share_rate = 5.0;
  const auto streams = emit_shared_stream(s, ObfuscationPolicy::none(), {}, opt);
  for (const auto& st : streams) {
    REQUIRE(st.frames.size() == 50);
    for (std::size_t i = 0; i < st.frames.size(); ++i) {
      CHECK(st.sample_indices[i] == 2 * i);
      CHECK(st.frames[i].forged_pose == s.trajectories[st.vehicle_index].poses[2 * i]);
    }
  }
}

TEST_CASE("policy none leaks exact trajectories under any pseudonym mode") {
  const Scenario s = line_scenario(3, 4.0, 0.1);
  for (auto mode : {PseudonymMode::constant, PseudonymMode::rotate_every_k_frames}) {
    const auto streams = emit_shared_stream(s, ObfuscationPolicy::none(), {mode, 4, 1}, {});
    for (const auto& st : streams)
      for (std::size_t i = 0; i < st.frames.size(); ++i) {
        CHECK(st.frames[i].forged_pose == s.trajectories[st.vehicle_index].poses[st.sample_indices[i]]);
        CHECK(st.frames[i].stack_tag == StackTag::open);
      }
  }
}

TEST_CASE("identical seeds give identical forged streams") {
  const Scenario s = line_scenario(4, 5.0, 0.1);
  for (auto policy : {ObfuscationPolicy::gaussian(6.0, 77), ObfuscationPolicy::fixed_offset(6.0, 77),
                      ObfuscationPolicy::smoothed_random_walk(1.0, 6.0, 77)}) {
    const auto a = emit_shared_stream(s, policy, {PseudonymMode::rotate_every_k_frames, 7, 2}, {});
    const auto b = emit_shared_stream(s, policy, {PseudonymMode::rotate_every_k_frames, 7, 2}, {});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].frames == b[i].frames);
    policy.seed = 78;
    const auto c = emit_shared_stream(s, policy, {PseudonymMode::rotate_every_k_frames, 7, 2}, {});
    CHECK(c[0].frames != a[0].frames);
  }
}

}  // TEST_SUITE
