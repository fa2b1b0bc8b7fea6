#include "actgraph/pipeline.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "actgraph/clip_io.hpp"
#include "actgraph/fs_util.hpp"
#include "actgraph/manifest.hpp"
#include "actgraph/tracker.hpp"

namespace actgraph::run {

using nlohmann::json;

std::filesystem::path resolve_output(const std::filesystem::path& path) {
  if (path.is_absolute()) return path;
  const char* root = std::getenv("ACTGRAPH_OUT_ROOT");
  if (root == nullptr || *root == '\0') return path;
  return std::filesystem::path(root) / path;
}

namespace {

void ensure_parent(const std::filesystem::path& path) {
  const auto parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::filesystem::path sibling(const std::filesystem::path& path, const std::string& ext) {
  std::filesystem::path p = path;
  p.replace_extension(ext);
  return p;
}

}  // namespace

synth::ScenarioSpec scenario_from_config(const KvConfig& config) {
  synth::ScenarioSpec spec;
  spec.t_frames = config.get_int("t_frames", spec.t_frames);
  spec.feature_dim = config.get_int("feature_dim", spec.feature_dim);
  spec.embedding_dim = config.get_int("embedding_dim", spec.embedding_dim);
  spec.frame_width = config.get_double("frame_width", spec.frame_width);
  spec.frame_height = config.get_double("frame_height", spec.frame_height);
  spec.actors_min = config.get_int("actors_min", spec.actors_min);
  spec.actors_max = config.get_int("actors_max", spec.actors_max);
  spec.objects_min = config.get_int("objects_min", spec.objects_min);
  spec.objects_max = config.get_int("objects_max", spec.objects_max);
  const auto& vocab = spec.vocabulary;
  std::vector<std::string> pose = config.get_list("pose_classes", vocab.pose());
  std::vector<std::string> manip = config.get_list("manipulation_classes", vocab.manipulation());
  std::vector<std::string> inter = config.get_list("interaction_classes", vocab.interaction());
  spec.vocabulary = ActionVocabulary(std::move(pose), std::move(manip), std::move(inter));
  spec.box_jitter = config.get_double("box_jitter", spec.box_jitter);
  spec.feature_noise = config.get_double("feature_noise", spec.feature_noise);
  spec.embedding_noise = config.get_double("embedding_noise", spec.embedding_noise);
  spec.distractor_rate = config.get_double("distractor_rate", spec.distractor_rate);
  spec.person_score_threshold =
      config.get_double("person_score_threshold", spec.person_score_threshold);
  spec.object_score_threshold =
      config.get_double("object_score_threshold", spec.object_score_threshold);
  spec.manip_rate = config.get_double("manip_rate", spec.manip_rate);
  spec.interaction_rate = config.get_double("interaction_rate", spec.interaction_rate);
  spec.max_speed = config.get_double("max_speed", spec.max_speed);
  spec.pose_dc = config.get_double("pose_dc", spec.pose_dc);
  spec.waveform_amp = config.get_double("waveform_amp", spec.waveform_amp);
  spec.pair_sum = config.get_double("pair_sum", spec.pair_sum);
  spec.beacon_scale = config.get_double("beacon_scale", spec.beacon_scale);
  spec.appearance_scale = config.get_double("appearance_scale", spec.appearance_scale);
  spec.source_coeff_range = config.get_double("source_coeff_range", spec.source_coeff_range);
  return spec;
}

assoc::EmbedderTrainConfig embedder_config_from(const KvConfig& config) {
  assoc::EmbedderTrainConfig c;
  c.margin = config.get_double("margin", c.margin);
  c.learning_rate = config.get_double("learning_rate", c.learning_rate);
  c.iterations = config.get_int("iterations", c.iterations);
  c.batch = config.get_int("batch", c.batch);
  c.seed = config.get_u64("seed", c.seed);
  return c;
}

train::TrainConfig train_config_from(const KvConfig& config) {
  train::TrainConfig c;
  c.variant = model::variant_from_string(
      config.get_string("variant", model::to_string(c.variant)));
  c.iters_phase1 = config.get_int("iters_phase1", c.iters_phase1);
  c.lr1 = config.get_double("lr1", c.lr1);
  c.iters_phase2 = config.get_int("iters_phase2", c.iters_phase2);
  c.lr2 = config.get_double("lr2", c.lr2);
  c.batch = config.get_int("batch", c.batch);
  c.seed = config.get_u64("seed", c.seed);
  c.dropout = config.get_bool("dropout", c.dropout);
  c.dropout_rate = config.get_double("dropout_rate", c.dropout_rate);
  c.gcn_layers = config.get_int("gcn_layers", c.gcn_layers);
  c.eval_every = config.get_int("eval_every", c.eval_every);
  return c;
}

void reject_unused_keys(const KvConfig& config, const std::string& what) {
  const auto unused = config.unused_keys();
  if (unused.empty()) return;
  std::ostringstream os;
  os << "unknown " << what << " config key(s):";
  for (const auto& key : unused) os << " " << key;
  throw std::runtime_error(os.str());
}

LoadedDataset load_dataset(const std::filesystem::path& jsonl_path) {
  LoadedDataset out;
  out.clips = read_dataset(jsonl_path);
  out.manifest = synth::load_manifest(synth::manifest_path_for(jsonl_path));
  return out;
}

model::ContextConfig context_config_for(const synth::DatasetManifest& manifest,
                                        bool zero_object_features) {
  model::ContextConfig config;
  config.person_score_threshold = manifest.spec.person_score_threshold;
  config.object_score_threshold = manifest.spec.object_score_threshold;
  config.total_classes = manifest.spec.vocabulary.total();
  config.zero_object_features = zero_object_features;
  return config;
}

std::vector<model::ClipContext> build_contexts(const LoadedDataset& dataset,
                                               const assoc::EmbedderModel* embedder,
                                               bool zero_object_features) {
  const model::ContextConfig config = context_config_for(dataset.manifest, zero_object_features);
  assoc::TrackerConfig tracker;
  tracker.person_score_min = dataset.manifest.spec.person_score_threshold;
  std::vector<model::ClipContext> contexts;
  contexts.reserve(dataset.clips.size());
  for (const ClipSample& clip : dataset.clips) {
    contexts.push_back(model::build_clip_context(clip, embedder, tracker, config));
  }
  return contexts;
}

std::vector<eval::ScoredPrediction> predict_dataset(const std::vector<model::ClipContext>& contexts,
                                                    model::HeadParams& params) {
  std::vector<eval::ScoredPrediction> preds;
  for (const model::ClipContext& context : contexts) {
    if (context.actor_count() == 0) continue;
    const num::Tensor probs = model::predict_probabilities(context, params);
    for (int i = 0; i < context.actor_count(); ++i) {
      eval::ScoredPrediction pred{context.clip_id,
                                  context.actor_boxes[static_cast<std::size_t>(i)],
                                  {}};
      pred.scores.resize(static_cast<std::size_t>(probs.cols()));
      for (int c = 0; c < probs.cols(); ++c) pred.scores[static_cast<std::size_t>(c)] = probs.at(i, c);
      preds.push_back(std::move(pred));
    }
  }
  return preds;
}

synth::DatasetManifest cmd_generate(const GenerateArgs& args) {
  const auto out = resolve_output(args.out_jsonl);
  ensure_parent(out);
  const synth::DatasetManifest manifest =
      synth::generate_dataset(args.spec, args.n_clips, args.seed, out);
  write_run_manifest(sibling(out, ".run.json"), "generate", args.seed, args.config_echo, {},
                     {{"dataset", out}, {"dataset_manifest", synth::manifest_path_for(out)}});
  return manifest;
}

void cmd_train_embedder(const TrainEmbedderArgs& args) {
  const auto out = resolve_output(args.out_checkpoint);
  ensure_parent(out);
  const LoadedDataset dataset = load_dataset(args.dataset);
  const assoc::EmbedderTrainResult result = assoc::train_embedder(dataset.clips, args.config);

  num::Checkpoint ckpt;
  ckpt.seed = args.config.seed;
  ckpt.tag = "embedder";
  assoc::embedder_to_checkpoint(result.model, ckpt);
  num::save_checkpoint(ckpt, out);

  const auto log_path = sibling(out, ".loss.csv");
  std::ofstream os(log_path, std::ios::trunc);
  os << "iteration,loss\n";
  for (std::size_t i = 0; i < result.loss_log.size(); ++i) {
    os << i << ',' << result.loss_log[i] << '\n';
  }
  write_run_manifest(sibling(out, ".run.json"), "train-embedder", args.config.seed,
                     args.config_echo, {{"dataset", args.dataset}},
                     {{"embedder_checkpoint", out}, {"loss_log", log_path}});
}

void cmd_track(const TrackArgs& args) {
  const auto out = resolve_output(args.out_json);
  ensure_parent(out);
  const LoadedDataset dataset = load_dataset(args.dataset);
  const assoc::EmbedderModel embedder =
      assoc::embedder_from_checkpoint(num::load_checkpoint(args.embedder_checkpoint));
  assoc::TrackerConfig tracker;
  tracker.person_score_min = dataset.manifest.spec.person_score_threshold;

  json clips = json::array();
  for (const ClipSample& clip : dataset.clips) {
    const assoc::TrackingResult result = assoc::track_clip(clip, embedder, tracker);
    json tubelets = json::array();
    for (std::size_t ti = 0; ti < result.tubelets.size(); ++ti) {
      const Tubelet& tubelet = result.tubelets[ti];
      json entries = json::array();
      for (std::size_t e = 0; e < tubelet.entries.size(); ++e) {
        const TubeletEntry& entry = tubelet.entries[e];
        entries.push_back(json{
            {"frame", entry.frame},
            {"box", {entry.box.x1, entry.box.y1, entry.box.x2, entry.box.y2}},
            {"match_distance", result.links[ti][e].match_distance}});
      }
      tubelets.push_back(json{{"actor_index", tubelet.actor_index}, {"entries", std::move(entries)}});
    }
    clips.push_back(json{{"clip_id", clip.clip_id}, {"tubelets", std::move(tubelets)}});
  }
  write_text_atomic(out, json{{"format_version", 1}, {"clips", std::move(clips)}}.dump(2) + "\n");
  write_run_manifest(sibling(out, ".run.json"), "track", 0, {},
                     {{"dataset", args.dataset}, {"embedder_checkpoint", args.embedder_checkpoint}},
                     {{"tracks", out}});
}

namespace {

bool variant_needs_tracking(model::Variant variant) {
  return variant == model::Variant::tubelet || variant == model::Variant::tubelet_hard ||
         variant == model::Variant::tubelet_soft;
}

model::ModelDims dims_for(const synth::DatasetManifest& manifest, int gcn_layers) {
  model::ModelDims dims;
  dims.feature_dim = manifest.spec.feature_dim;
  dims.n_pose = manifest.spec.vocabulary.pose_count();
  dims.n_manip = manifest.spec.vocabulary.manipulation_count();
  dims.n_inter = manifest.spec.vocabulary.interaction_count();
  dims.gcn_layers = gcn_layers;
  return dims;
}

}  // namespace

void cmd_train(const TrainArgs& args) {
  const auto out = resolve_output(args.out_checkpoint);
  ensure_parent(out);
  const LoadedDataset dataset = load_dataset(args.dataset);

  std::optional<assoc::EmbedderModel> embedder;
  if (args.embedder_checkpoint) {
    embedder = assoc::embedder_from_checkpoint(num::load_checkpoint(*args.embedder_checkpoint));
  }
  if (variant_needs_tracking(args.config.variant) && !embedder) {
    throw std::runtime_error(std::string("variant ") + model::to_string(args.config.variant) +
                             " requires --embedder");
  }

  std::vector<model::ClipContext> contexts =
      build_contexts(dataset, embedder ? &*embedder : nullptr);

  train::EvalHook hook;
  std::vector<model::ClipContext> eval_contexts;
  ActionVocabulary eval_vocab;
  if (args.eval_dataset) {
    const LoadedDataset eval_set = load_dataset(*args.eval_dataset);
    eval_vocab = eval_set.manifest.spec.vocabulary;
    eval_contexts = build_contexts(eval_set, embedder ? &*embedder : nullptr);
    // the hook needs the clips for ground truth
    auto eval_clips = std::make_shared<std::vector<ClipSample>>(eval_set.clips);
    hook = [eval_contexts, eval_vocab, eval_clips](model::HeadParams& params) mutable {
      const auto preds = predict_dataset(eval_contexts, params);
      return eval::evaluate_predictions(preds, *eval_clips, eval_vocab).mean_ap;
    };
  }

  const model::ModelDims dims = dims_for(dataset.manifest, args.config.gcn_layers);
  train::TrainResult result = train::train_head(contexts, dims, args.config, hook);

  num::Checkpoint ckpt = result.params.to_checkpoint(args.config.seed);
  if (embedder) assoc::embedder_to_checkpoint(*embedder, ckpt);
  num::save_checkpoint(ckpt, out);

  const auto log_path =
      args.out_log_csv.empty() ? sibling(out, ".log.csv") : resolve_output(args.out_log_csv);
  ensure_parent(log_path);
  train::write_train_log_csv(log_path, result.log);

  std::vector<ArtifactRef> inputs{{"dataset", args.dataset}};
  if (args.embedder_checkpoint) inputs.push_back({"embedder_checkpoint", *args.embedder_checkpoint});
  if (args.eval_dataset) inputs.push_back({"eval_dataset", *args.eval_dataset});
  write_run_manifest(sibling(out, ".run.json"), "train", args.config.seed, args.config_echo,
                     inputs, {{"checkpoint", out}, {"train_log", log_path}});
}

eval::EvalReport cmd_eval(const EvalArgs& args) {
  const auto out_dir = resolve_output(args.out_dir);
  std::filesystem::create_directories(out_dir);
  const LoadedDataset dataset = load_dataset(args.dataset);
  const num::Checkpoint ckpt = num::load_checkpoint(args.checkpoint);
  model::HeadParams params = model::HeadParams::from_checkpoint(ckpt);

  std::optional<assoc::EmbedderModel> embedder;
  if (assoc::checkpoint_has_embedder(ckpt)) {
    embedder = assoc::embedder_from_checkpoint(ckpt);
  }
  if (variant_needs_tracking(params.variant) && !embedder) {
    throw std::runtime_error("checkpoint lacks the embedder tensors its variant needs");
  }

  const std::vector<model::ClipContext> contexts =
      build_contexts(dataset, embedder ? &*embedder : nullptr, args.zero_object_features);
  const auto preds = predict_dataset(contexts, params);
  const eval::EvalReport report = eval::evaluate_predictions(
      preds, dataset.clips, dataset.manifest.spec.vocabulary, args.min_gt);

  write_text_atomic(out_dir / "report.json", eval::report_to_json(report));
  write_text_atomic(out_dir / "report.txt", eval::report_to_table(report));
  write_text_atomic(out_dir / "per_class.csv", eval::report_per_class_csv(report));
  write_run_manifest(out_dir / "run_manifest.json", "eval", ckpt.seed, {},
                     {{"dataset", args.dataset}, {"checkpoint", args.checkpoint}},
                     {{"report_json", out_dir / "report.json"},
                      {"report_table", out_dir / "report.txt"},
                      {"per_class_csv", out_dir / "per_class.csv"}});
  return report;
}

AblateResult cmd_ablate(const AblateArgs& args) {
  const auto out_dir = resolve_output(args.out_dir);
  std::filesystem::create_directories(out_dir);
  const LoadedDataset train_set = load_dataset(args.train_dataset);
  const LoadedDataset eval_set = load_dataset(args.eval_dataset);
  if (train_set.manifest.spec.vocabulary != eval_set.manifest.spec.vocabulary) {
    throw std::runtime_error("train and eval datasets use different vocabularies");
  }

  const assoc::EmbedderTrainResult embedder =
      assoc::train_embedder(train_set.clips, args.embedder_config);
  std::vector<model::ClipContext> train_contexts = build_contexts(train_set, &embedder.model);
  std::vector<model::ClipContext> eval_contexts = build_contexts(eval_set, &embedder.model);

  std::vector<model::Variant> variants =
      args.variants.empty() ? model::all_variants() : args.variants;

  AblateResult result;
  result.out_dir = out_dir;
  std::vector<ArtifactRef> outputs;
  for (model::Variant variant : variants) {
    const std::filesystem::path variant_dir = out_dir / model::to_string(variant);
    std::filesystem::create_directories(variant_dir);

    train::TrainConfig config = args.train_config;
    config.variant = variant;
    train::TrainResult trained = train::train_head(train_contexts,
        dims_for(train_set.manifest, config.gcn_layers), config);

    num::Checkpoint ckpt = trained.params.to_checkpoint(config.seed);
    assoc::embedder_to_checkpoint(embedder.model, ckpt);
    num::save_checkpoint(ckpt, variant_dir / "checkpoint.ckpt");
    train::write_train_log_csv(variant_dir / "train_log.csv", trained.log);

    const auto preds = predict_dataset(eval_contexts, trained.params);
    const eval::EvalReport report = eval::evaluate_predictions(
        preds, eval_set.clips, eval_set.manifest.spec.vocabulary, args.min_gt);
    write_text_atomic(variant_dir / "report.json", eval::report_to_json(report));
    write_text_atomic(variant_dir / "report.txt", eval::report_to_table(report));
    write_text_atomic(variant_dir / "per_class.csv", eval::report_per_class_csv(report));
    outputs.push_back({std::string(model::to_string(variant)) + "_checkpoint",
                       variant_dir / "checkpoint.ckpt"});
    outputs.push_back({std::string(model::to_string(variant)) + "_report",
                       variant_dir / "report.json"});
    result.reports.emplace_back(variant, report);
  }

  // Combined comparison table.
  {
    std::ostringstream table, csv;
    table << std::left << std::setw(16) << "variant" << std::right << std::setw(10) << "mAP"
          << std::setw(10) << "pose" << std::setw(10) << "manip" << std::setw(10) << "inter"
          << '\n'
          << std::string(56, '-') << '\n';
    csv << "variant,mean_ap,pose_map,manipulation_map,interaction_map\n";
    json jrows = json::array();
    for (const auto& [variant, report] : result.reports) {
      table << std::left << std::setw(16) << model::to_string(variant) << std::right
            << std::fixed << std::setprecision(4) << std::setw(10) << report.mean_ap
            << std::setw(10) << report.pose_map << std::setw(10) << report.manipulation_map
            << std::setw(10) << report.interaction_map << '\n';
      csv << model::to_string(variant) << ',' << report.mean_ap << ',' << report.pose_map << ','
          << report.manipulation_map << ',' << report.interaction_map << '\n';
      jrows.push_back(json{{"variant", model::to_string(variant)},
                           {"mean_ap", report.mean_ap},
                           {"pose_map", report.pose_map},
                           {"manipulation_map", report.manipulation_map},
                           {"interaction_map", report.interaction_map}});
    }
    write_text_atomic(out_dir / "comparison.txt", table.str());
    write_text_atomic(out_dir / "comparison.csv", csv.str());
    write_text_atomic(out_dir / "comparison.json", jrows.dump(2) + "\n");
    outputs.push_back({"comparison", out_dir / "comparison.json"});
  }
  write_run_manifest(out_dir / "run_manifest.json", "ablate", args.train_config.seed,
                     args.config_echo,
                     {{"train_dataset", args.train_dataset}, {"eval_dataset", args.eval_dataset}},
                     outputs);
  return result;
}

void cmd_graph_dump(const GraphDumpArgs& args) {
  const auto out_dir = resolve_output(args.out_dir);
  std::filesystem::create_directories(out_dir);
  const LoadedDataset dataset = load_dataset(args.dataset);
  const num::Checkpoint ckpt = num::load_checkpoint(args.checkpoint);
  model::HeadParams params = model::HeadParams::from_checkpoint(ckpt);
  if (params.variant != model::Variant::tubelet_soft) {
    throw std::runtime_error("graph-dump requires a tubelet_soft checkpoint");
  }
  const assoc::EmbedderModel embedder = assoc::embedder_from_checkpoint(ckpt);

  assoc::TrackerConfig tracker;
  tracker.person_score_min = dataset.manifest.spec.person_score_threshold;
  const model::ContextConfig context_config = context_config_for(dataset.manifest);

  std::vector<ArtifactRef> outputs;
  for (int clip_id : args.clip_ids) {
    const ClipSample* clip = nullptr;
    for (const ClipSample& candidate : dataset.clips) {
      if (candidate.clip_id == clip_id) {
        clip = &candidate;
        break;
      }
    }
    if (clip == nullptr) {
      throw std::runtime_error("clip id " + std::to_string(clip_id) + " not in dataset");
    }
    const model::ClipContext context =
        model::build_clip_context(*clip, &embedder, tracker, context_config);
    json j;
    j["clip_id"] = clip_id;
    json actors = json::array();
    for (const Box& box : context.actor_boxes) {
      actors.push_back(json::array({box.x1, box.y1, box.x2, box.y2}));
    }
    j["actor_boxes"] = std::move(actors);
    json objects = json::array();
    for (const Box& box : context.object_boxes) {
      objects.push_back(json::array({box.x1, box.y1, box.x2, box.y2}));
    }
    j["object_boxes"] = std::move(objects);

    if (context.actor_count() > 0) {
      num::Tape tape;
      model::VariantVars vars = model::bind_params(tape, params);
      const model::ForwardResult fwd =
          model::variant_forward(tape, context, vars, params, {});
      auto matrix_to_json = [&tape](num::Var v) {
        json rows = json::array();
        if (!v.valid()) return rows;
        const num::Tensor& m = tape.value(v);
        for (int i = 0; i < m.rows(); ++i) {
          json row = json::array();
          for (int c = 0; c < m.cols(); ++c) row.push_back(m.at(i, c));
          rows.push_back(std::move(row));
        }
        return rows;
      };
      j["object_edges"] = matrix_to_json(fwd.edges.object_weights);
      j["actor_edges"] = matrix_to_json(fwd.edges.actor_weights);
    } else {
      j["object_edges"] = json::array();
      j["actor_edges"] = json::array();
    }
    const auto path = out_dir / ("clip_" + std::to_string(clip_id) + ".graph.json");
    write_text_atomic(path, j.dump(2) + "\n");
    outputs.push_back({"graph", path});
  }
  write_run_manifest(out_dir / "run_manifest.json", "graph-dump", ckpt.seed, {},
                     {{"dataset", args.dataset}, {"checkpoint", args.checkpoint}}, outputs);
}

}  // namespace actgraph::run
