#pragma once

#include <filesystem>
#include <iosfwd>

#include "bsp/trainer.hpp"

namespace bsp {

enum class CheckpointFormat { Binary, Text };

/// Binary layout (little-endian):
///   8 bytes  magic "BSPCKPT\0"
///   u32      format version (1)
///   u32      reserved (0)
///   u64      iteration t
///   u64      entry count
///   count ×  { u64 feature id, f64 weight (IEEE-754 bits) }, ascending id
///
/// Text layout: "bsp-checkpoint 1", "iteration <t>", "entries <count>",
/// then one "<id>\t<weight>" line per entry with weights in hex-float form,
/// so both forms round-trip exactly.
void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint, CheckpointFormat format);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint, CheckpointFormat format);
/// Detects the format from the leading bytes.
Checkpoint load_checkpoint(const std::filesystem::path& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace bsp
