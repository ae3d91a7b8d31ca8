#include "coopriv/wire.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include <zlib.h>

namespace coopriv::wire {

namespace {
constexpr std::uint8_t kMagic[4] = {'S', 'H', 'R', 'P'};

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  template <typename T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    out_.insert(out_.end(), raw, raw + sizeof(T));
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, std::size_t offset) : bytes_(bytes), offset_(offset) {}

  template <typename T>
  T get() {
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + offset_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    offset_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  std::size_t offset() const { return offset_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t offset_;
};

}  // namespace

std::string to_string(DecodeErrorKind kind) {
  switch (kind) {
    case DecodeErrorKind::bad_magic: return "bad-magic";
    case DecodeErrorKind::unsupported_version: return "unsupported-version";
    case DecodeErrorKind::checksum_mismatch: return "checksum-mismatch";
    case DecodeErrorKind::truncated_payload: return "truncated-payload";
    case DecodeErrorKind::length_mismatch: return "length-mismatch";
    case DecodeErrorKind::invalid_field: return "invalid-field";
  }
  return "unknown";
}

DecodeError::DecodeError(DecodeErrorKind kind, std::size_t offset, const std::string& message)
    : Error(to_string(kind), to_string(kind) + " at byte " + std::to_string(offset) + ": " + message),
      kind_(kind),
      offset_(offset) {}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large buffers.
  std::size_t done = 0;
  while (done < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - done, 1u << 30));
    crc = ::crc32(crc, bytes.data() + done, chunk);
    done += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode(const std::vector<SharedFrame>& frames) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + frames.size() * kFrameSize + kChecksumSize);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  Writer w(out);
  w.put<std::uint8_t>(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(frames.size()));
  for (const auto& f : frames) {
    w.put<std::uint64_t>(f.pseudonym);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(f.t_us));
    w.put<double>(f.forged_pose.x);
    w.put<double>(f.forged_pose.y);
    w.put<double>(f.forged_pose.z);
    w.put<double>(f.forged_pose.heading);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(f.priority));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(f.stack_tag));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(f.payload.sensor_kind));
    w.put<float>(f.payload.nominal_rate);
    w.put<std::uint32_t>(f.payload.size_bytes);
  }
  w.put<std::uint32_t>(crc32(out));
  return out;
}

std::vector<SharedFrame> decode(std::span<const std::uint8_t> bytes) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (i >= bytes.size()) throw DecodeError(DecodeErrorKind::truncated_payload, bytes.size(), "envelope ends inside the magic");
    if (bytes[i] != kMagic[i]) throw DecodeError(DecodeErrorKind::bad_magic, i, "expected \"SHRP\"");
  }
  if (bytes.size() < 5) throw DecodeError(DecodeErrorKind::truncated_payload, bytes.size(), "missing version");
  if (bytes[4] != kVersion)
    throw DecodeError(DecodeErrorKind::unsupported_version, 4, "version " + std::to_string(bytes[4]));
  if (bytes.size() < kHeaderSize + kChecksumSize)
    throw DecodeError(DecodeErrorKind::truncated_payload, bytes.size(), "envelope shorter than header + checksum");

  Reader header(bytes, 5);
  const auto count = header.get<std::uint32_t>();
  const std::size_t expected = kHeaderSize + static_cast<std::size_t>(count) * kFrameSize + kChecksumSize;
  if (bytes.size() < expected)
    throw DecodeError(DecodeErrorKind::truncated_payload, bytes.size(),
                      "frame_count " + std::to_string(count) + " needs " + std::to_string(expected) + " bytes");
  if (bytes.size() > expected)
    throw DecodeError(DecodeErrorKind::length_mismatch, expected,
                      std::to_string(bytes.size() - expected) + " bytes after the checksum");

  const std::size_t body = expected - kChecksumSize;
  Reader trailer(bytes, body);
  const auto stored = trailer.get<std::uint32_t>();
  if (stored != crc32(bytes.first(body)))
    throw DecodeError(DecodeErrorKind::checksum_mismatch, body, "CRC32 does not match the envelope contents");

  std::vector<SharedFrame> frames;
  frames.reserve(count);
  Reader r(bytes, kHeaderSize);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t at = r.offset();
    SharedFrame f;
    f.pseudonym = r.get<std::uint64_t>();
    f.t_us = static_cast<std::int64_t>(r.get<std::uint64_t>());
    f.forged_pose.x = r.get<double>();
    f.forged_pose.y = r.get<double>();
    f.forged_pose.z = r.get<double>();
    f.forged_pose.heading = r.get<double>();
    const auto priority = r.get<std::uint8_t>();
    const auto stack = r.get<std::uint8_t>();
    const auto sensor = r.get<std::uint8_t>();
    if (priority > 1 || stack > 1 || sensor > 2)
      throw DecodeError(DecodeErrorKind::invalid_field, at + 48, "enumeration out of range in frame " + std::to_string(i));
    f.priority = static_cast<Priority>(priority);
    f.stack_tag = static_cast<StackTag>(stack);
    f.payload.sensor_kind = static_cast<SensorKind>(sensor);
    f.payload.nominal_rate = r.get<float>();
    f.payload.size_bytes = r.get<std::uint32_t>();
    frames.push_back(f);
  }
  return frames;
}

nlohmann::json to_json(const Pose& pose) {
  return {{"x", pose.x}, {"y", pose.y}, {"z", pose.z}, {"heading", pose.heading}};
}

Pose pose_from_json(const nlohmann::json& j) {
  return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("z").get<double>(), j.at("heading").get<double>()};
}

nlohmann::json to_json(const SharedFrame& f) {
  return {{"pseudonym", f.pseudonym},
          {"t", f.t()},
          {"t_us", f.t_us},
          {"forged_pose", to_json(f.forged_pose)},
          {"payload",
           {{"sensor_kind", to_string(f.payload.sensor_kind)},
            {"nominal_rate", f.payload.nominal_rate},
            {"size_bytes", f.payload.size_bytes}}},
          {"priority", to_string(f.priority)},
          {"stack_tag", to_string(f.stack_tag)}};
}

SharedFrame frame_from_json(const nlohmann::json& j) {
  SharedFrame f;
  f.pseudonym = j.at("pseudonym").get<std::uint64_t>();
  f.t_us = j.contains("t_us") ? j.at("t_us").get<std::int64_t>() : to_micros(j.at("t").get<double>());
  f.forged_pose = pose_from_json(j.at("forged_pose"));
  const auto& p = j.at("payload");
  f.payload.sensor_kind = sensor_kind_from_string(p.at("sensor_kind").get<std::string>());
  f.payload.nominal_rate = p.at("nominal_rate").get<float>();
  f.payload.size_bytes = p.at("size_bytes").get<std::uint32_t>();
  f.priority = priority_from_string(j.at("priority").get<std::string>());
  f.stack_tag = stack_tag_from_string(j.at("stack_tag").get<std::string>());
  return f;
}

nlohmann::json to_json(const std::vector<SharedFrame>& frames) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : frames) arr.push_back(to_json(f));
  return arr;
}

nlohmann::json to_json(const Scenario& s) {
  nlohmann::json trajectories = nlohmann::json::array();
  for (const auto& t : s.trajectories) {
    nlohmann::json poses = nlohmann::json::array();
    for (const auto& p : t.poses) poses.push_back(to_json(p));
    trajectories.push_back({{"vehicle_id", t.vehicle_id}, {"dt", t.dt}, {"poses", std::move(poses)}});
  }
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : s.world.points) points.push_back({p.x, p.y, p.z});
  return {{"scenario_id", s.scenario_id},
          {"duration", s.duration},
          {"dt", s.dt},
          {"ego_id", s.ego_id},
          {"rng_seed", s.rng_seed},
          {"trajectories", std::move(trajectories)},
          {"world", {{"points", std::move(points)}, {"intensity", s.world.intensity}}}};
}

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  s.scenario_id = j.at("scenario_id").get<std::string>();
  s.duration = j.at("duration").get<double>();
  s.dt = j.at("dt").get<double>();
  s.ego_id = j.at("ego_id").get<std::string>();
  s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  for (const auto& t : j.at("trajectories")) {
    Trajectory traj{t.at("vehicle_id").get<std::string>(), t.at("dt").get<double>(), {}};
    for (const auto& p : t.at("poses")) traj.poses.push_back(pose_from_json(p));
    s.trajectories.push_back(std::move(traj));
  }
  const auto& world = j.at("world");
  for (const auto& p : world.at("points")) s.world.points.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
  s.world.intensity = world.at("intensity").get<std::vector<float>>();
  return s;
}

}  // namespace coopriv::wire
