#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace actgraph::run {

inline constexpr const char* kToolVersion = "0.1.0";

struct ArtifactRef {
  std::string role;
  std::filesystem::path path;
};

/// Writes the run manifest that accompanies every produced artifact: command,
/// resolved configuration, seed, and input/output paths with content hashes.
/// Contains no timestamps, so reruns with identical inputs are byte-identical.
void write_run_manifest(const std::filesystem::path& path, const std::string& command,
                        std::uint64_t seed, const std::map<std::string, std::string>& config,
                        const std::vector<ArtifactRef>& inputs,
                        const std::vector<ArtifactRef>& outputs);

}  // namespace actgraph::run
