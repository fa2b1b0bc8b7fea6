// Command-line entry point wiring the full pipeline: dataset generation,
// embedder training, tracking, head training, evaluation, the ablation table,
// and relation-graph snapshots.

#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "actgraph/manifest.hpp"
#include "actgraph/pipeline.hpp"

namespace {

using actgraph::run::KvConfig;

KvConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  KvConfig config = path.empty() ? KvConfig() : KvConfig::from_file(path);
  for (const std::string& pair : overrides) config.set_pair(pair);
  return config;
}

std::vector<int> parse_clip_ids(const std::string& spec) {
  std::vector<int> ids;
  std::string token;
  std::istringstream is(spec);
  while (std::getline(is, token, ',')) {
    if (!token.empty()) ids.push_back(std::stoi(token));
  }
  return ids;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"actor-graph action detection pipeline"};
  app.set_version_flag("--version", actgraph::run::kToolVersion);
  app.require_subcommand(1);

  std::string config_path, dataset, eval_dataset, out, embedder_path, checkpoint, variant_name,
      clip_ids;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int n_clips = 0;
  bool zero_objects = false;
  int min_gt = 5;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value config file");
    cmd->add_option("--set", overrides, "override a config key (key=value, repeatable)");
    cmd->add_option("--seed", seed, "master seed")->each([&](const std::string&) {
      seed_given = true;
    });
  };

  CLI::App* generate = app.add_subcommand("generate", "generate a synthetic dataset");
  add_common(generate);
  generate->add_option("--n", n_clips, "number of clips")->required();
  generate->add_option("--out", out, "output JSONL path")->required();

  CLI::App* train_embedder = app.add_subcommand("train-embedder", "train the appearance embedder");
  add_common(train_embedder);
  train_embedder->add_option("--dataset", dataset, "training dataset JSONL")->required();
  train_embedder->add_option("--out", out, "output checkpoint path")->required();

  CLI::App* track = app.add_subcommand("track", "link detections into tubelets");
  track->add_option("--dataset", dataset, "dataset JSONL")->required();
  track->add_option("--embedder", embedder_path, "embedder checkpoint")->required();
  track->add_option("--out", out, "output JSON path")->required();

  CLI::App* train = app.add_subcommand("train", "train an action-detection head");
  add_common(train);
  train->add_option("--dataset", dataset, "training dataset JSONL")->required();
  train->add_option("--eval-dataset", eval_dataset, "periodic-eval dataset JSONL");
  train->add_option("--variant", variant_name, "model variant");
  train->add_option("--embedder", embedder_path, "embedder checkpoint (tubelet variants)");
  train->add_option("--out", out, "output checkpoint path")->required();

  CLI::App* evaluate = app.add_subcommand("eval", "evaluate a checkpoint");
  evaluate->add_option("--dataset", dataset, "eval dataset JSONL")->required();
  evaluate->add_option("--checkpoint", checkpoint, "head checkpoint")->required();
  evaluate->add_option("--out", out, "output directory")->required();
  evaluate->add_flag("--zero-object-features", zero_objects,
                     "zero every object feature before the forward pass");
  evaluate->add_option("--min-gt", min_gt, "minimum ground-truth samples per evaluated class");

  CLI::App* ablate = app.add_subcommand("ablate", "train and evaluate every model variant");
  add_common(ablate);
  ablate->add_option("--train-dataset", dataset, "training dataset JSONL")->required();
  ablate->add_option("--eval-dataset", eval_dataset, "eval dataset JSONL")->required();
  ablate->add_option("--out", out, "output directory")->required();
  ablate->add_option("--variants", variant_name, "comma-separated variant subset");
  ablate->add_option("--min-gt", min_gt, "minimum ground-truth samples per evaluated class");

  CLI::App* graph_dump = app.add_subcommand("graph-dump", "export relation-graph snapshots");
  graph_dump->add_option("--dataset", dataset, "dataset JSONL")->required();
  graph_dump->add_option("--checkpoint", checkpoint, "tubelet_soft checkpoint")->required();
  graph_dump->add_option("--clips", clip_ids, "comma-separated clip ids")->required();
  graph_dump->add_option("--out", out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    namespace run = actgraph::run;
    if (generate->parsed()) {
      KvConfig config = load_config(config_path, overrides);
      run::GenerateArgs args;
      args.spec = run::scenario_from_config(config);
      run::reject_unused_keys(config, "scenario");
      args.n_clips = n_clips;
      args.seed = seed_given ? seed : 42;
      args.out_jsonl = out;
      args.config_echo = config.values();
      const auto manifest = run::cmd_generate(args);
      std::cout << "wrote " << manifest.n_clips << " clips to " << out << "\n";
    } else if (train_embedder->parsed()) {
      KvConfig config = load_config(config_path, overrides);
      run::TrainEmbedderArgs args;
      args.config = run::embedder_config_from(config);
      run::reject_unused_keys(config, "embedder");
      if (seed_given) args.config.seed = seed;
      args.dataset = dataset;
      args.out_checkpoint = out;
      args.config_echo = config.values();
      run::cmd_train_embedder(args);
      std::cout << "wrote embedder checkpoint " << out << "\n";
    } else if (track->parsed()) {
      run::cmd_track({dataset, embedder_path, out});
      std::cout << "wrote tubelet dump " << out << "\n";
    } else if (train->parsed()) {
      KvConfig config = load_config(config_path, overrides);
      run::TrainArgs args;
      args.config = run::train_config_from(config);
      run::reject_unused_keys(config, "train");
      if (seed_given) args.config.seed = seed;
      if (!variant_name.empty()) {
        args.config.variant = actgraph::model::variant_from_string(variant_name);
      }
      args.dataset = dataset;
      if (!eval_dataset.empty()) args.eval_dataset = eval_dataset;
      if (!embedder_path.empty()) args.embedder_checkpoint = embedder_path;
      args.out_checkpoint = out;
      args.config_echo = config.values();
      run::cmd_train(args);
      std::cout << "wrote head checkpoint " << out << "\n";
    } else if (evaluate->parsed()) {
      run::EvalArgs args;
      args.dataset = dataset;
      args.checkpoint = checkpoint;
      args.out_dir = out;
      args.zero_object_features = zero_objects;
      args.min_gt = min_gt;
      const auto report = run::cmd_eval(args);
      std::cout << actgraph::eval::report_to_table(report);
    } else if (ablate->parsed()) {
      KvConfig config = load_config(config_path, overrides);
      run::AblateArgs args;
      args.train_config = run::train_config_from(config);
      {
        // embedder settings share the config file under an "embedder_" prefix
        KvConfig embedder_view;
        for (const char* key : {"margin", "learning_rate", "iterations", "batch", "seed"}) {
          const std::string prefixed = std::string("embedder_") + key;
          if (config.has(prefixed)) {
            embedder_view.set(key, config.get_string(prefixed, ""));
          }
        }
        args.embedder_config = run::embedder_config_from(embedder_view);
      }
      run::reject_unused_keys(config, "ablate");
      if (seed_given) {
        args.train_config.seed = seed;
        args.embedder_config.seed = seed;
      }
      if (!variant_name.empty()) {
        for (const std::string& name : KvConfig::from_string("v=" + variant_name).get_list("v", {})) {
          args.variants.push_back(actgraph::model::variant_from_string(name));
        }
      }
      args.train_dataset = dataset;
      args.eval_dataset = eval_dataset;
      args.out_dir = out;
      args.min_gt = min_gt;
      args.config_echo = config.values();
      const auto result = run::cmd_ablate(args);
      std::ifstream table(result.out_dir / "comparison.txt");
      std::cout << table.rdbuf();
    } else if (graph_dump->parsed()) {
      run::GraphDumpArgs args;
      args.dataset = dataset;
      args.checkpoint = checkpoint;
      args.clip_ids = parse_clip_ids(clip_ids);
      args.out_dir = out;
      run::cmd_graph_dump(args);
      std::cout << "wrote graph snapshots to " << out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "actgraph: error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
