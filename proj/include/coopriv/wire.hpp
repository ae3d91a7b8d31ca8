#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "coopriv/error.hpp"
#include "coopriv/obfuscation.hpp"
#include "coopriv/scene.hpp"

namespace coopriv::wire {

inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 9;    // magic + version + frame_count
inline constexpr std::size_t kChecksumSize = 4;  // CRC32, little-endian
inline constexpr std::size_t kFrameSize = 59;

enum class DecodeErrorKind {
  bad_magic,
  unsupported_version,
  checksum_mismatch,
  truncated_payload,
  length_mismatch,
  invalid_field,
};

std::string to_string(DecodeErrorKind kind);

class DecodeError : public Error {
 public:
  DecodeError(DecodeErrorKind kind, std::size_t offset, const std::string& message);
  DecodeErrorKind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  DecodeErrorKind kind_;
  std::size_t offset_;
};

/// Envelope layout (all little-endian):
///   "SHRP" | version u8 | frame_count u32 | frames | crc32 u32
/// Each frame: pseudonym u64, t micros u64, x/y/z/heading f64, priority u8,
/// stack_tag u8, sensor_kind u8, nominal_rate f32, size_bytes u32.
std::vector<std::uint8_t> encode(const std::vector<SharedFrame>& frames);

std::vector<SharedFrame> decode(std::span<const std::uint8_t> bytes);

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

// JSON mirror, field names as in the type definitions. Debugging aid only;
// the binary form is authoritative.
nlohmann::json to_json(const SharedFrame& frame);
SharedFrame frame_from_json(const nlohmann::json& j);
nlohmann::json to_json(const std::vector<SharedFrame>& frames);
nlohmann::json to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& j);

}  // namespace coopriv::wire
