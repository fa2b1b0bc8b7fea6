#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "actgraph/tensor.hpp"

namespace actgraph::num {

/// Named parameter tensors plus the seed that produced them. Serialized to a
/// little-endian binary container (see docs/FORMATS.md); round-trips are
/// byte-exact.
struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::uint32_t format_version = kFormatVersion;
  std::uint64_t seed = 0;
  std::string tag;  // free-form, e.g. the model variant name
  std::vector<std::pair<std::string, Tensor>> entries;

  void add(std::string name, Tensor tensor);
  bool contains(const std::string& name) const;
  const Tensor& get(const std::string& name) const;  // throws when missing
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace actgraph::num
