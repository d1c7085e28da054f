#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "arena/nn/tensor.hpp"

namespace arena::nn {

inline constexpr int kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor2 value;
};

/// Named tensors plus free-form metadata and the fingerprint of the game
/// configuration the weights were trained against. Layout: docs/checkpoint_format.md.
struct Checkpoint {
  int version = kCheckpointVersion;
  std::string fingerprint;
  std::map<std::string, std::string> meta;
  std::vector<NamedTensor> tensors;

  const Tensor2* find(const std::string& name) const;
};

/// Writes atomically (temp file then rename). Throws IoError.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
/// Throws IoError on unreadable, truncated or version-mismatched files.
Checkpoint read_checkpoint(const std::filesystem::path& path);

std::string to_text(const Checkpoint& checkpoint);
Checkpoint from_text(const std::string& text, const std::string& source = "<memory>");

}  // namespace arena::nn
