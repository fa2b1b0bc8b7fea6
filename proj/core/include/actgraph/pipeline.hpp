#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "actgraph/config.hpp"
#include "actgraph/embedder.hpp"
#include "actgraph/eval.hpp"
#include "actgraph/synthgen.hpp"
#include "actgraph/train.hpp"
#include "actgraph/variants.hpp"

namespace actgraph::run {

/// Resolves a relative output path under $ACTGRAPH_OUT_ROOT when that is set;
/// absolute paths and unset environments pass through unchanged.
std::filesystem::path resolve_output(const std::filesystem::path& path);

synth::ScenarioSpec scenario_from_config(const KvConfig& config);
assoc::EmbedderTrainConfig embedder_config_from(const KvConfig& config);
train::TrainConfig train_config_from(const KvConfig& config);

void reject_unused_keys(const KvConfig& config, const std::string& what);

// ---- dataset/context plumbing ------------------------------------------

struct LoadedDataset {
  std::vector<ClipSample> clips;
  synth::DatasetManifest manifest;
};

LoadedDataset load_dataset(const std::filesystem::path& jsonl_path);

model::ContextConfig context_config_for(const synth::DatasetManifest& manifest,
                                        bool zero_object_features = false);

std::vector<model::ClipContext> build_contexts(const LoadedDataset& dataset,
                                               const assoc::EmbedderModel* embedder,
                                               bool zero_object_features = false);

std::vector<eval::ScoredPrediction> predict_dataset(const std::vector<model::ClipContext>& contexts,
                                                    model::HeadParams& params);

// ---- commands ------------------------------------------------------------

struct GenerateArgs {
  synth::ScenarioSpec spec;
  int n_clips = 0;
  std::uint64_t seed = 0;
  std::filesystem::path out_jsonl;
  std::map<std::string, std::string> config_echo;
};
synth::DatasetManifest cmd_generate(const GenerateArgs& args);

struct TrainEmbedderArgs {
  std::filesystem::path dataset;
  assoc::EmbedderTrainConfig config;
  std::filesystem::path out_checkpoint;
  std::map<std::string, std::string> config_echo;
};
void cmd_train_embedder(const TrainEmbedderArgs& args);

struct TrackArgs {
  std::filesystem::path dataset;
  std::filesystem::path embedder_checkpoint;
  std::filesystem::path out_json;
};
void cmd_track(const TrackArgs& args);

struct TrainArgs {
  std::filesystem::path dataset;
  std::optional<std::filesystem::path> eval_dataset;
  std::optional<std::filesystem::path> embedder_checkpoint;  // required by tubelet variants
  train::TrainConfig config;
  std::filesystem::path out_checkpoint;
  std::filesystem::path out_log_csv;  // defaults next to the checkpoint when empty
  std::map<std::string, std::string> config_echo;
};
void cmd_train(const TrainArgs& args);

struct EvalArgs {
  std::filesystem::path dataset;
  std::filesystem::path checkpoint;
  std::filesystem::path out_dir;
  bool zero_object_features = false;
  int min_gt = 5;
};
eval::EvalReport cmd_eval(const EvalArgs& args);

struct AblateArgs {
  std::filesystem::path train_dataset;
  std::filesystem::path eval_dataset;
  std::filesystem::path out_dir;
  std::vector<model::Variant> variants;  // empty: every ablation-table row
  train::TrainConfig train_config;
  assoc::EmbedderTrainConfig embedder_config;
  int min_gt = 5;
  std::map<std::string, std::string> config_echo;
};
struct AblateResult {
  std::vector<std::pair<model::Variant, eval::EvalReport>> reports;
  std::filesystem::path out_dir;
};
AblateResult cmd_ablate(const AblateArgs& args);

struct GraphDumpArgs {
  std::filesystem::path dataset;
  std::filesystem::path checkpoint;  // must hold a tubelet_soft model
  std::vector<int> clip_ids;
  std::filesystem::path out_dir;
};
void cmd_graph_dump(const GraphDumpArgs& args);

}  // namespace actgraph::run
