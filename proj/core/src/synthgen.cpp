#include "actgraph/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "actgraph/clip_io.hpp"
#include "actgraph/fs_util.hpp"
#include "actgraph/rng.hpp"

namespace actgraph::synth {

using nlohmann::json;

namespace {

void require_feasible(const ScenarioSpec& spec) {
  const auto errors = spec.validate();
  if (!errors.empty()) {
    std::ostringstream os;
    os << "infeasible scenario spec:";
    for (const auto& e : errors) os << " " << e << ";";
    throw std::invalid_argument(os.str());
  }
}

Box clamp_into_frame(double x1, double y1, double w, double h, const ScenarioSpec& spec) {
  x1 = std::clamp(x1, 0.0, spec.frame_width - w);
  y1 = std::clamp(y1, 0.0, spec.frame_height - h);
  return Box(x1, y1, x1 + w, y1 + h);
}

std::vector<Box> bouncing_trajectory(Rng& rng, const ScenarioSpec& spec, double w, double h,
                                     double speed_cap) {
  double x = rng.uniform(0.0, spec.frame_width - w);
  double y = rng.uniform(0.0, spec.frame_height - h);
  double vx = rng.uniform(-speed_cap, speed_cap);
  double vy = rng.uniform(-speed_cap, speed_cap);
  std::vector<Box> traj;
  traj.reserve(static_cast<std::size_t>(spec.t_frames));
  for (int t = 0; t < spec.t_frames; ++t) {
    traj.push_back(clamp_into_frame(x, y, w, h, spec));
    x += vx;
    y += vy;
    if (x < 0.0 || x > spec.frame_width - w) {
      vx = -vx;
      x = std::clamp(x, 0.0, spec.frame_width - w);
    }
    if (y < 0.0 || y > spec.frame_height - h) {
      vy = -vy;
      y = std::clamp(y, 0.0, spec.frame_height - h);
    }
  }
  return traj;
}

Box jitter_box(Rng& rng, const Box& box, double sigma, const ScenarioSpec& spec) {
  const double dx = rng.normal(0.0, sigma);
  const double dy = rng.normal(0.0, sigma);
  const double dw = rng.normal(0.0, sigma * 0.5);
  const double dh = rng.normal(0.0, sigma * 0.5);
  double w = std::max(4.0, box.width() + dw);
  double h = std::max(4.0, box.height() + dh);
  w = std::min(w, spec.frame_width);
  h = std::min(h, spec.frame_height);
  return clamp_into_frame(box.x1 + dx, box.y1 + dy, w, h, spec);
}

std::vector<std::vector<double>> orthonormal_identities(Rng& rng, int count, int dims) {
  std::vector<std::vector<double>> identities;
  identities.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(identities.size()) < count) {
    std::vector<double> v(static_cast<std::size_t>(dims));
    for (double& x : v) x = rng.normal();
    for (const auto& prev : identities) {
      double dot = 0.0;
      for (int i = 0; i < dims; ++i) dot += v[i] * prev[i];
      for (int i = 0; i < dims; ++i) v[i] -= dot * prev[i];
    }
    double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (norm < 1e-6) continue;  // essentially impossible for dims >> count
    for (double& x : v) x /= norm;
    identities.push_back(std::move(v));
  }
  return identities;
}

std::vector<double> gaussian_vector(Rng& rng, int dims, double sigma) {
  std::vector<double> v(static_cast<std::size_t>(dims));
  for (double& x : v) x = rng.normal(0.0, sigma);
  return v;
}

template <typename T>
void shuffled_indices(Rng& rng, int n, std::vector<T>& out) {
  out.resize(static_cast<std::size_t>(n));
  std::iota(out.begin(), out.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    std::swap(out[static_cast<std::size_t>(i)],
              out[static_cast<std::size_t>(rng.uniform_int(i + 1))]);
  }
}

}  // namespace

GeneratedClip generate_clip(const ScenarioSpec& spec, std::uint64_t seed, int clip_index) {
  require_feasible(spec);
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(clip_index)));
  const FeatureLayout layout = FeatureLayout::from(spec);
  const auto& vocab = spec.vocabulary;
  const int n_pose = vocab.pose_count();
  const int n_manip = vocab.manipulation_count();
  const int n_inter = vocab.interaction_count();
  const auto waves = pose_waveforms(spec.t_frames, n_pose);

  const int n_actors = spec.actors_min + rng.uniform_int(spec.actors_max - spec.actors_min + 1);
  const int n_objects = spec.objects_min + rng.uniform_int(spec.objects_max - spec.objects_min + 1);

  GeneratedClip out;
  out.actors.resize(static_cast<std::size_t>(n_actors));
  out.objects.resize(static_cast<std::size_t>(n_objects));

  const auto identities = orthonormal_identities(rng, n_actors, spec.embedding_dim);
  for (int a = 0; a < n_actors; ++a) {
    ActorScript& actor = out.actors[static_cast<std::size_t>(a)];
    actor.identity = identities[static_cast<std::size_t>(a)];
    const double w = rng.uniform(34.0, 56.0);
    const double h = rng.uniform(70.0, 105.0);
    actor.trajectory = bouncing_trajectory(rng, spec, w, h, spec.max_speed);
    actor.pose_class = rng.uniform_int(n_pose);
    actor.waveform_sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    actor.appearance = gaussian_vector(rng, layout.appearance_dims, spec.appearance_scale);
    actor.manip_source_coeff.resize(static_cast<std::size_t>(n_manip));
    for (double& c : actor.manip_source_coeff) {
      c = rng.uniform(-spec.source_coeff_range, spec.source_coeff_range);
    }
  }

  for (int o = 0; o < n_objects; ++o) {
    ObjectScript& object = out.objects[static_cast<std::size_t>(o)];
    const double s = rng.uniform(18.0, 40.0);
    object.trajectory = bouncing_trajectory(rng, spec, s, s, 1.0);
    object.appearance = gaussian_vector(rng, layout.appearance_dims, spec.appearance_scale);
  }

  // Actor-object pairing: each actor claims at most one free object; the pair
  // carries a manipulation label with probability manip_rate. The class
  // coefficient splits across the pair so that only the combined nodes expose
  // the +-pair_sum signal.
  std::vector<int> object_pool;
  shuffled_indices(rng, n_objects, object_pool);
  for (int a = 0; a < n_actors; ++a) {
    if (object_pool.empty()) break;
    ActorScript& actor = out.actors[static_cast<std::size_t>(a)];
    const int obj = object_pool.back();
    object_pool.pop_back();
    actor.manip_target_object = obj;
    if (rng.uniform() < spec.manip_rate) {
      actor.manip_class = rng.uniform_int(n_manip);
    }
    actor.object_link_beacon =
        gaussian_vector(rng, layout.object_link_dims, 1.5 * spec.beacon_scale);
    ObjectScript& object = out.objects[static_cast<std::size_t>(obj)];
    object.targeted_by = a;
    object.object_link_beacon = actor.object_link_beacon;
    object.manip_target_coeff.resize(static_cast<std::size_t>(n_manip));
    for (int c = 0; c < n_manip; ++c) {
      const double delta = (actor.manip_class && *actor.manip_class == c) ? 1.0 : -1.0;
      object.manip_target_coeff[static_cast<std::size_t>(c)] =
          delta * spec.pair_sum - actor.manip_source_coeff[static_cast<std::size_t>(c)];
    }
  }

  // Actor-actor pairing: disjoint pairs sharing a beacon. Interaction classes
  // are mutual (both members carry the label). Each member holds the share
  // delta*pair_sum/2 +- z with a pair-shared Gaussian offset z, so a single
  // actor's bank value is only weakly informative while the pair sum lands on
  // +-pair_sum exactly.
  std::vector<int> actor_order;
  shuffled_indices(rng, n_actors, actor_order);
  for (int p = 0; p + 1 < n_actors; p += 2) {
    const int first = actor_order[static_cast<std::size_t>(p)];
    const int second = actor_order[static_cast<std::size_t>(p + 1)];
    ActorScript& a = out.actors[static_cast<std::size_t>(first)];
    ActorScript& b = out.actors[static_cast<std::size_t>(second)];
    a.interaction_target_actor = second;
    b.interaction_target_actor = first;
    if (rng.uniform() < spec.interaction_rate) {
      a.interaction_class = rng.uniform_int(n_inter);
      b.interaction_class = a.interaction_class;
    }
    a.actor_link_beacon = gaussian_vector(rng, layout.actor_link_dims, spec.beacon_scale);
    b.actor_link_beacon = a.actor_link_beacon;
    a.inter_share_coeff.resize(static_cast<std::size_t>(n_inter));
    b.inter_share_coeff.resize(static_cast<std::size_t>(n_inter));
    for (int c = 0; c < n_inter; ++c) {
      const double delta = (a.interaction_class && *a.interaction_class == c) ? 1.0 : -1.0;
      const double offset = rng.normal(0.0, 1.2 * spec.pair_sum);
      a.inter_share_coeff[static_cast<std::size_t>(c)] = delta * spec.pair_sum * 0.5 + offset;
      b.inter_share_coeff[static_cast<std::size_t>(c)] = delta * spec.pair_sum * 0.5 - offset;
    }
  }

  // Label index lists.
  for (int a = 0; a < n_actors; ++a) {
    ActorScript& actor = out.actors[static_cast<std::size_t>(a)];
    actor.label_indices.push_back(actor.pose_class);
    if (actor.manip_class) actor.label_indices.push_back(n_pose + *actor.manip_class);
    if (actor.interaction_class) {
      actor.label_indices.push_back(n_pose + n_manip + *actor.interaction_class);
    }
  }

  // Frame-independent feature bases.
  auto actor_base = [&](int a) {
    const ActorScript& actor = out.actors[static_cast<std::size_t>(a)];
    std::vector<double> base(static_cast<std::size_t>(spec.feature_dim), 0.0);
    for (int c = 0; c < n_manip; ++c) {
      base[static_cast<std::size_t>(layout.manip_source_begin + c)] =
          actor.manip_source_coeff[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < static_cast<int>(actor.inter_share_coeff.size()); ++c) {
      base[static_cast<std::size_t>(layout.interaction_begin + c)] =
          actor.inter_share_coeff[static_cast<std::size_t>(c)];
    }
    if (!actor.object_link_beacon.empty()) {
      for (int i = 0; i < layout.object_link_dims; ++i) {
        base[static_cast<std::size_t>(layout.object_link_begin + i)] =
            actor.object_link_beacon[static_cast<std::size_t>(i)];
      }
    }
    if (!actor.actor_link_beacon.empty()) {
      for (int i = 0; i < layout.actor_link_dims; ++i) {
        base[static_cast<std::size_t>(layout.actor_link_begin + i)] =
            actor.actor_link_beacon[static_cast<std::size_t>(i)];
      }
    }
    for (int i = 0; i < layout.appearance_dims; ++i) {
      base[static_cast<std::size_t>(layout.appearance_begin + i)] =
          actor.appearance[static_cast<std::size_t>(i)];
    }
    return base;
  };

  auto object_base = [&](int o) {
    const ObjectScript& object = out.objects[static_cast<std::size_t>(o)];
    std::vector<double> base(static_cast<std::size_t>(spec.feature_dim), 0.0);
    for (int c = 0; c < static_cast<int>(object.manip_target_coeff.size()); ++c) {
      base[static_cast<std::size_t>(layout.manip_target_begin + c)] =
          object.manip_target_coeff[static_cast<std::size_t>(c)];
    }
    if (!object.object_link_beacon.empty()) {
      for (int i = 0; i < layout.object_link_dims; ++i) {
        base[static_cast<std::size_t>(layout.object_link_begin + i)] =
            object.object_link_beacon[static_cast<std::size_t>(i)];
      }
    }
    for (int i = 0; i < layout.appearance_dims; ++i) {
      base[static_cast<std::size_t>(layout.appearance_begin + i)] =
          object.appearance[static_cast<std::size_t>(i)];
    }
    return base;
  };

  std::vector<std::vector<double>> actor_bases, object_bases;
  for (int a = 0; a < n_actors; ++a) actor_bases.push_back(actor_base(a));
  for (int o = 0; o < n_objects; ++o) object_bases.push_back(object_base(o));

  ClipSample& clip = out.clip;
  clip.clip_id = clip_index;
  clip.frames.resize(static_cast<std::size_t>(spec.t_frames));
  for (int t = 0; t < spec.t_frames; ++t) {
    auto& frame = clip.frames[static_cast<std::size_t>(t)];
    for (int a = 0; a < n_actors; ++a) {
      const ActorScript& actor = out.actors[static_cast<std::size_t>(a)];
      Detection det{jitter_box(rng, actor.trajectory[static_cast<std::size_t>(t)],
                               spec.box_jitter, spec),
                    spec.person_score_threshold +
                        (1.0 - spec.person_score_threshold) * rng.uniform(),
                    DetectionKind::person,
                    actor_bases[static_cast<std::size_t>(a)],
                    std::nullopt,
                    a};
      double& pose_dim =
          det.feature[static_cast<std::size_t>(layout.pose_begin + actor.pose_class)];
      pose_dim += spec.pose_dc +
                  actor.waveform_sign * spec.waveform_amp *
                      waves[static_cast<std::size_t>(actor.pose_class)][static_cast<std::size_t>(t)];
      for (double& v : det.feature) v += rng.normal(0.0, spec.feature_noise);
      EmbeddingVec emb = actor.identity;
      for (double& v : emb) v += rng.normal(0.0, spec.embedding_noise);
      det.embedding = std::move(emb);
      frame.push_back(std::move(det));
    }
    for (int o = 0; o < n_objects; ++o) {
      const ObjectScript& object = out.objects[static_cast<std::size_t>(o)];
      Detection det{jitter_box(rng, object.trajectory[static_cast<std::size_t>(t)],
                               spec.box_jitter, spec),
                    spec.object_score_threshold +
                        (1.0 - spec.object_score_threshold) * rng.uniform(),
                    DetectionKind::object,
                    object_bases[static_cast<std::size_t>(o)],
                    std::nullopt,
                    std::nullopt};
      for (double& v : det.feature) v += rng.normal(0.0, spec.feature_noise);
      frame.push_back(std::move(det));
    }
    const int n_distractors = rng.poisson(spec.distractor_rate);
    for (int d = 0; d < n_distractors; ++d) {
      const bool is_person = rng.uniform() < 0.5;
      const double w = is_person ? rng.uniform(30.0, 60.0) : rng.uniform(15.0, 40.0);
      const double h = is_person ? rng.uniform(60.0, 110.0) : w;
      const double x = rng.uniform(0.0, spec.frame_width - w);
      const double y = rng.uniform(0.0, spec.frame_height - h);
      Detection det{Box(x, y, x + w, y + h),
                    rng.uniform(0.2, 1.0),
                    is_person ? DetectionKind::person : DetectionKind::object,
                    std::vector<double>(static_cast<std::size_t>(spec.feature_dim), 0.0),
                    std::nullopt,
                    std::nullopt};
      for (int i = 0; i < layout.appearance_dims; ++i) {
        det.feature[static_cast<std::size_t>(layout.appearance_begin + i)] =
            rng.normal(0.0, spec.appearance_scale);
      }
      for (double& v : det.feature) v += rng.normal(0.0, spec.feature_noise);
      if (is_person) det.embedding = gaussian_vector(rng, spec.embedding_dim, 1.0);
      frame.push_back(std::move(det));
    }
  }

  const int middle = clip.middle_frame();
  for (int a = 0; a < n_actors; ++a) {
    const ActorScript& actor = out.actors[static_cast<std::size_t>(a)];
    std::vector<double> labels(static_cast<std::size_t>(vocab.total()), 0.0);
    for (int idx : actor.label_indices) labels[static_cast<std::size_t>(idx)] = 1.0;
    clip.gt_actors.push_back(
        GtActor{actor.trajectory[static_cast<std::size_t>(middle)], std::move(labels)});
  }
  return out;
}

namespace {

json vocabulary_to_json(const ActionVocabulary& vocab) {
  return json{{"pose", vocab.pose()},
              {"manipulation", vocab.manipulation()},
              {"interaction", vocab.interaction()}};
}

ActionVocabulary vocabulary_from_json(const json& j) {
  return ActionVocabulary(j.at("pose").get<std::vector<std::string>>(),
                          j.at("manipulation").get<std::vector<std::string>>(),
                          j.at("interaction").get<std::vector<std::string>>());
}

json spec_to_json(const ScenarioSpec& s) {
  return json{{"t_frames", s.t_frames},
              {"feature_dim", s.feature_dim},
              {"embedding_dim", s.embedding_dim},
              {"frame_width", s.frame_width},
              {"frame_height", s.frame_height},
              {"actors_min", s.actors_min},
              {"actors_max", s.actors_max},
              {"objects_min", s.objects_min},
              {"objects_max", s.objects_max},
              {"vocabulary", vocabulary_to_json(s.vocabulary)},
              {"box_jitter", s.box_jitter},
              {"feature_noise", s.feature_noise},
              {"embedding_noise", s.embedding_noise},
              {"distractor_rate", s.distractor_rate},
              {"person_score_threshold", s.person_score_threshold},
              {"object_score_threshold", s.object_score_threshold},
              {"manip_rate", s.manip_rate},
              {"interaction_rate", s.interaction_rate},
              {"max_speed", s.max_speed},
              {"pose_dc", s.pose_dc},
              {"waveform_amp", s.waveform_amp},
              {"pair_sum", s.pair_sum},
              {"beacon_scale", s.beacon_scale},
              {"appearance_scale", s.appearance_scale},
              {"source_coeff_range", s.source_coeff_range}};
}

ScenarioSpec spec_from_json(const json& j) {
  ScenarioSpec s;
  s.t_frames = j.at("t_frames").get<int>();
  s.feature_dim = j.at("feature_dim").get<int>();
  s.embedding_dim = j.at("embedding_dim").get<int>();
  s.frame_width = j.at("frame_width").get<double>();
  s.frame_height = j.at("frame_height").get<double>();
  s.actors_min = j.at("actors_min").get<int>();
  s.actors_max = j.at("actors_max").get<int>();
  s.objects_min = j.at("objects_min").get<int>();
  s.objects_max = j.at("objects_max").get<int>();
  s.vocabulary = vocabulary_from_json(j.at("vocabulary"));
  s.box_jitter = j.at("box_jitter").get<double>();
  s.feature_noise = j.at("feature_noise").get<double>();
  s.embedding_noise = j.at("embedding_noise").get<double>();
  s.distractor_rate = j.at("distractor_rate").get<double>();
  s.person_score_threshold = j.at("person_score_threshold").get<double>();
  s.object_score_threshold = j.at("object_score_threshold").get<double>();
  s.manip_rate = j.at("manip_rate").get<double>();
  s.interaction_rate = j.at("interaction_rate").get<double>();
  s.max_speed = j.at("max_speed").get<double>();
  s.pose_dc = j.at("pose_dc").get<double>();
  s.waveform_amp = j.at("waveform_amp").get<double>();
  s.pair_sum = j.at("pair_sum").get<double>();
  s.beacon_scale = j.at("beacon_scale").get<double>();
  s.appearance_scale = j.at("appearance_scale").get<double>();
  s.source_coeff_range = j.at("source_coeff_range").get<double>();
  return s;
}

json layout_to_json(const FeatureLayout& l) {
  return json{{"pose_begin", l.pose_begin},
              {"manip_source_begin", l.manip_source_begin},
              {"manip_target_begin", l.manip_target_begin},
              {"interaction_begin", l.interaction_begin},
              {"object_link_begin", l.object_link_begin},
              {"object_link_dims", l.object_link_dims},
              {"actor_link_begin", l.actor_link_begin},
              {"actor_link_dims", l.actor_link_dims},
              {"appearance_begin", l.appearance_begin},
              {"appearance_dims", l.appearance_dims}};
}

}  // namespace

DatasetManifest generate_dataset(const ScenarioSpec& spec, int n_clips, std::uint64_t seed,
                                 const std::filesystem::path& out_jsonl) {
  require_feasible(spec);
  if (n_clips < 0) throw std::invalid_argument("n_clips must be >= 0");

  DatasetManifest manifest;
  manifest.spec = spec;
  manifest.n_clips = n_clips;
  manifest.seed = seed;
  manifest.waveforms = pose_waveforms(spec.t_frames, spec.vocabulary.pose_count());
  manifest.layout = FeatureLayout::from(spec);
  for (int c = 0; c < spec.vocabulary.total(); ++c) {
    manifest.class_counts[spec.vocabulary.name_of(c)] = 0;
  }

  std::ofstream os(out_jsonl, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open dataset for writing: " + out_jsonl.string());
  for (int i = 0; i < n_clips; ++i) {
    GeneratedClip generated = generate_clip(spec, seed, i);
    for (const GtActor& gt : generated.clip.gt_actors) {
      for (int c = 0; c < spec.vocabulary.total(); ++c) {
        if (gt.labels[static_cast<std::size_t>(c)] != 0.0) {
          ++manifest.class_counts[spec.vocabulary.name_of(c)];
        }
      }
    }
    os << clip_to_jsonl(generated.clip) << '\n';
  }
  os.close();
  if (!os) throw std::runtime_error("dataset write failed: " + out_jsonl.string());

  save_manifest(manifest, manifest_path_for(out_jsonl));
  return manifest;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& dataset_path) {
  std::filesystem::path p = dataset_path;
  p.replace_extension(".manifest.json");
  return p;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  json j{{"format_version", manifest.format_version},
         {"kind", "dataset_manifest"},
         {"spec", spec_to_json(manifest.spec)},
         {"n_clips", manifest.n_clips},
         {"seed", manifest.seed},
         {"class_counts", manifest.class_counts},
         {"waveforms", manifest.waveforms},
         {"feature_layout", layout_to_json(manifest.layout)}};
  write_text_atomic(path, j.dump(2) + "\n");
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open manifest: " + path.string());
  json j;
  is >> j;
  DatasetManifest manifest;
  manifest.format_version = j.at("format_version").get<int>();
  manifest.spec = spec_from_json(j.at("spec"));
  manifest.n_clips = j.at("n_clips").get<int>();
  manifest.seed = j.at("seed").get<std::uint64_t>();
  manifest.class_counts = j.at("class_counts").get<std::map<std::string, int>>();
  manifest.waveforms = j.at("waveforms").get<std::vector<std::vector<double>>>();
  manifest.layout = FeatureLayout::from(manifest.spec);
  return manifest;
}

}  // namespace actgraph::synth
