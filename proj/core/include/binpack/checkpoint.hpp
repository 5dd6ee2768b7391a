#pragma once

#include <string>
#include <vector>

#include "binpack/tensor.hpp"

namespace binpack {

/// Named group of tensors, e.g. one network's parameters or one optimizer's
/// moment buffers.
struct CheckpointSection {
  std::string name;
  std::vector<TensorND> tensors;
};

/// On disk: a magic line, a manifest line (structured text carrying section
/// names/shapes plus caller metadata), then the raw little-endian 64-bit
/// float payload of every tensor in order. Round-trips bit-exactly.
struct Checkpoint {
  std::string meta_json = "{}";  // caller-owned manifest payload
  std::vector<CheckpointSection> sections;

  const CheckpointSection* find(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

/// Throws MissingCheckpoint when the file does not exist,
/// FormatVersionMismatch on bad magic/version, IoFailure on short reads.
Checkpoint load_checkpoint(const std::string& path);

/// Deep-copies live parameter tensors into a section.
CheckpointSection snapshot_section(const std::string& name,
                                   const std::vector<TensorND*>& params);

/// Writes a section back into live tensors; shapes must match exactly.
void restore_section(const CheckpointSection& section,
                     const std::vector<TensorND*>& params);

}  // namespace binpack
