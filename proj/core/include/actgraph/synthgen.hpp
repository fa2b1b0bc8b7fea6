#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "actgraph/scenario.hpp"
#include "actgraph/types.hpp"

namespace actgraph::synth {

struct GeneratedClip {
  ClipSample clip;
  std::vector<ActorScript> actors;
  std::vector<ObjectScript> objects;
};

/// Deterministic function of (spec, seed, clip_index). Throws on an
/// infeasible spec.
GeneratedClip generate_clip(const ScenarioSpec& spec, std::uint64_t seed, int clip_index = 0);

struct DatasetManifest {
  int format_version = 1;
  ScenarioSpec spec;
  int n_clips = 0;
  std::uint64_t seed = 0;
  std::map<std::string, int> class_counts;  // over ground-truth actor labels
  std::vector<std::vector<double>> waveforms;
  FeatureLayout layout;
};

/// Writes one clip per line (JSONL) plus a manifest JSON next to it.
DatasetManifest generate_dataset(const ScenarioSpec& spec, int n_clips, std::uint64_t seed,
                                 const std::filesystem::path& out_jsonl);

std::filesystem::path manifest_path_for(const std::filesystem::path& dataset_path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

}  // namespace actgraph::synth
