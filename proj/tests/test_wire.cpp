#include <doctest.h>

#include <bit>
#include <cstring>
#include <random>

#include "coopriv/wire.hpp"

using namespace coopriv;

namespace {

SharedFrame random_frame(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(-1e4, 1e4);
  SharedFrame f;
  f.pseudonym = rng();
  f.t_us = static_cast<std::int64_t>(rng() >> 2);
  // Mix ordinary values with arbitrary bit patterns (subnormals, NaN payloads).
  auto value = [&]() { return (rng() % 4 == 0) ? std::bit_cast<double>(rng()) : coord(rng); };
  f.forged_pose = {value(), value(), value(), value()};
  f.priority = static_cast<Priority>(rng() % 2);
  f.stack_tag = static_cast<StackTag>(rng() % 2);
  f.payload.sensor_kind = static_cast<SensorKind>(rng() % 3);
  f.payload.nominal_rate = (rng() % 4 == 0) ? std::bit_cast<float>(static_cast<std::uint32_t>(rng()))
                                            : static_cast<float>(coord(rng));
  f.payload.size_bytes = static_cast<std::uint32_t>(rng());
  return f;
}

bool bit_equal(const SharedFrame& a, const SharedFrame& b) {
  auto same = [](auto x, auto y) { return std::memcmp(&x, &y, sizeof x) == 0; };
  return a.pseudonym == b.pseudonym && a.t_us == b.t_us && same(a.forged_pose.x, b.forged_pose.x) &&
         same(a.forged_pose.y, b.forged_pose.y) && same(a.forged_pose.z, b.forged_pose.z) &&
         same(a.forged_pose.heading, b.forged_pose.heading) && a.priority == b.priority &&
         a.stack_tag == b.stack_tag && a.payload.sensor_kind == b.payload.sensor_kind &&
         same(a.payload.nominal_rate, b.payload.nominal_rate) && a.payload.size_bytes == b.payload.size_bytes;
}

wire::DecodeErrorKind decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    wire::decode(bytes);
  } catch (const wire::DecodeError& e) {
    return e.kind();
  }
  FAIL("decode accepted a corrupted envelope");
  return wire::DecodeErrorKind::bad_magic;
}

}  // namespace

TEST_SUITE("wire") {

TEST_CASE("empty envelope is 13 bytes") {
  const auto bytes = wire::encode({});
  CHECK(bytes.size() == 13);
  CHECK(std::memcmp(bytes.data(), "SHRP", 4) == 0);
  CHECK(bytes[4] == 1);
  CHECK(wire::decode(bytes).empty());
}

TEST_CASE("frame layout is little-endian and fixed size") {
  SharedFrame f;
  f.pseudonym = 0x0102030405060708ULL;
  f.t_us = 1'500'000;
  f.forged_pose = {1.0, -2.0, 0.5, 0.25};
  f.priority = Priority::elevated;
  f.payload = {SensorKind::radar, 20.0f, 4096};
  const auto bytes = wire::encode({f});
  REQUIRE(bytes.size() == wire::kHeaderSize + wire::kFrameSize + wire::kChecksumSize);
  CHECK(bytes[5] == 1);  // frame_count low byte
  CHECK(bytes[9] == 0x08);
  CHECK(bytes[16] == 0x01);
  double x;
  std::memcpy(&x, bytes.data() + 9 + 16, 8);
  CHECK(x == 1.0);
  CHECK(bytes[9 + 48] == 1);  // priority
  CHECK(bytes[9 + 50] == 2);  // sensor kind
  const std::span<const std::uint8_t> body(bytes.data(), bytes.size() - 4);
  const std::uint32_t crc = wire::crc32(body);
  CHECK(bytes[bytes.size() - 4] == (crc & 0xff));
  CHECK(wire::crc32(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("123456789"), 9)) ==
        0xCBF43926u);
}

TEST_CASE("1000-frame fuzz roundtrip is bit exact and encoding is deterministic") {
  std::mt19937_64 rng(1);
  std::vector<SharedFrame> frames;
  for (int i = 0; i < 1000; ++i) frames.push_back(random_frame(rng));
  const auto bytes = wire::encode(frames);
  CHECK(bytes == wire::encode(frames));
  const auto back = wire::decode(bytes);
  REQUIRE(back.size() == frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) CHECK(bit_equal(back[i], frames[i]));
}

TEST_CASE("structural errors are distinct and carry offsets") {
  std::mt19937_64 rng(2);
  std::vector<SharedFrame> frames{random_frame(rng), random_frame(rng)};
  const auto good = wire::encode(frames);

  auto bad = good;
  bad[0] = 'X';
  CHECK(decode_error(bad) == wire::DecodeErrorKind::bad_magic);

  bad = good;
  bad[4] = 2;
  try {
    wire::decode(bad);
    FAIL("expected unsupported-version");
  } catch (const wire::DecodeError& e) {
    CHECK(e.kind() == wire::DecodeErrorKind::unsupported_version);
    CHECK(e.offset() == 4);
  }

  bad = good;
  bad[20] ^= 0x10;
  CHECK(decode_error(bad) == wire::DecodeErrorKind::checksum_mismatch);

  bad.assign(good.begin(), good.end() - 10);
  CHECK(decode_error(bad) == wire::DecodeErrorKind::truncated_payload);
  CHECK(decode_error({'S', 'H'}) == wire::DecodeErrorKind::truncated_payload);

  bad = good;
  bad.insert(bad.end() - 4, 0);
  CHECK(decode_error(bad) == wire::DecodeErrorKind::length_mismatch);

  // An out-of-range enumeration behind a valid checksum.
  bad = good;
  bad[9 + 50] = 7;
  bad.resize(bad.size() - 4);
  const std::uint32_t crc = wire::crc32(bad);
  for (int i = 0; i < 4; ++i) bad.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));
  CHECK(decode_error(bad) == wire::DecodeErrorKind::invalid_field);
}

TEST_CASE("10^4 single-byte corruptions are all detected") {
  std::mt19937_64 rng(3);
  std::vector<SharedFrame> frames;
  for (int i = 0; i < 40; ++i) frames.push_back(random_frame(rng));
  const auto good = wire::encode(frames);
  std::uniform_int_distribution<std::size_t> pos(0, good.size() - 1);
  std::uniform_int_distribution<int> delta(1, 255);
  for (int trial = 0; trial < 10000; ++trial) {
    auto bad = good;
    const std::size_t at = pos(rng);
    bad[at] = static_cast<std::uint8_t>(bad[at] ^ delta(rng));
    CHECK_THROWS_AS(wire::decode(bad), wire::DecodeError);
  }
}

TEST_CASE("JSON mirror roundtrip") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    SharedFrame f = random_frame(rng);
    f.forged_pose = {1.25 * i, -3.5, 0.0, 0.1};
    f.payload.nominal_rate = 10.0f;
    const auto j = wire::to_json(f);
    CHECK(j.contains("forged_pose"));
    CHECK(j.contains("stack_tag"));
    CHECK(wire::frame_from_json(j) == f);
  }
}

}  // TEST_SUITE
