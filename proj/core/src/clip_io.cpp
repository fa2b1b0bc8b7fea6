#include "actgraph/clip_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace actgraph {

using nlohmann::json;

namespace {

json box_to_json(const Box& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

Box box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::runtime_error("box must be a 4-element array");
  return Box(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>());
}

json detection_to_json(const Detection& det) {
  json j;
  j["box"] = box_to_json(det.box);
  j["score"] = det.score;
  j["kind"] = to_string(det.kind);
  j["feature"] = det.feature;
  if (det.embedding) j["embedding"] = *det.embedding;
  if (det.id_hint) j["id_hint"] = *det.id_hint;
  return j;
}

Detection detection_from_json(const json& j) {
  Detection det{box_from_json(j.at("box")),
                j.at("score").get<double>(),
                detection_kind_from_string(j.at("kind").get<std::string>()),
                j.at("feature").get<std::vector<double>>(),
                std::nullopt,
                std::nullopt};
  if (j.contains("embedding")) det.embedding = j["embedding"].get<std::vector<double>>();
  if (j.contains("id_hint")) det.id_hint = j["id_hint"].get<int>();
  return det;
}

}  // namespace

std::string clip_to_jsonl(const ClipSample& clip) {
  json j;
  j["format_version"] = 1;
  j["clip_id"] = clip.clip_id;
  j["middle_frame"] = clip.middle_frame();
  json frames = json::array();
  for (const auto& frame : clip.frames) {
    json dets = json::array();
    for (const Detection& det : frame) dets.push_back(detection_to_json(det));
    frames.push_back(std::move(dets));
  }
  j["frames"] = std::move(frames);
  json gts = json::array();
  for (const GtActor& gt : clip.gt_actors) {
    gts.push_back(json{{"box", box_to_json(gt.box)}, {"labels", gt.labels}});
  }
  j["gt_actors"] = std::move(gts);
  return j.dump();
}

ClipSample clip_from_jsonl(const std::string& line) {
  const json j = json::parse(line);
  const int version = j.value("format_version", 0);
  if (version != 1) {
    throw std::runtime_error("unsupported dataset format_version " + std::to_string(version));
  }
  ClipSample clip;
  clip.clip_id = j.value("clip_id", 0);
  for (const json& frame : j.at("frames")) {
    std::vector<Detection> dets;
    dets.reserve(frame.size());
    for (const json& det : frame) dets.push_back(detection_from_json(det));
    clip.frames.push_back(std::move(dets));
  }
  for (const json& gt : j.at("gt_actors")) {
    clip.gt_actors.push_back(GtActor{box_from_json(gt.at("box")),
                                     gt.at("labels").get<std::vector<double>>()});
  }
  return clip;
}

void write_dataset(const std::filesystem::path& path, const std::vector<ClipSample>& clips) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open dataset for writing: " + path.string());
  for (const ClipSample& clip : clips) {
    os << clip_to_jsonl(clip) << '\n';
  }
  if (!os) throw std::runtime_error("dataset write failed: " + path.string());
}

std::vector<ClipSample> read_dataset(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open dataset: " + path.string());
  std::vector<ClipSample> clips;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      clips.push_back(clip_from_jsonl(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return clips;
}

}  // namespace actgraph
