#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "actgraph/types.hpp"

namespace actgraph {

/// Serialize one clip as a single JSON line (dataset format_version 1).
std::string clip_to_jsonl(const ClipSample& clip);
ClipSample clip_from_jsonl(const std::string& line);

void write_dataset(const std::filesystem::path& path, const std::vector<ClipSample>& clips);
std::vector<ClipSample> read_dataset(const std::filesystem::path& path);

}  // namespace actgraph
