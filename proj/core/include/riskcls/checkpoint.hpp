#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "riskcls/classifier.hpp"

namespace riskcls {

// Binary checkpoint, little-endian:
//   "RCLSCKPT" | u32 version | u32 flags (bit 0: classifier present)
//   u64 vocab_size, dim, layers, max_len
//   u64 n_tokens, then per token: u32 length + bytes
//   u64 n_tensors, then per tensor: u32 name length + name, u64 rows,
//       u64 cols, rows*cols IEEE-754 doubles in row-major order
// Round trips are bit-exact.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Vocabulary vocab;
  EncoderParams encoder;
  std::optional<ClassifierParams> classifier;
};

void write_checkpoint(const Checkpoint& ckpt, std::ostream& out);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace riskcls
