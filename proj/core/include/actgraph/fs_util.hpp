#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace actgraph {

/// Writes via a temporary sibling file and renames into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

/// FNV-1a 64-bit digest of a file's bytes, as "0x..." hex. Integrity tag for
/// run manifests, not a cryptographic hash.
std::string fnv1a64_file(const std::filesystem::path& path);

std::string fnv1a64_bytes(const std::string& bytes);

}  // namespace actgraph
