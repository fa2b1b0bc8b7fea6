#include "actgraph/manifest.hpp"

#include <json.hpp>

#include "actgraph/fs_util.hpp"

namespace actgraph::run {

using nlohmann::json;

void write_run_manifest(const std::filesystem::path& path, const std::string& command,
                        std::uint64_t seed, const std::map<std::string, std::string>& config,
                        const std::vector<ArtifactRef>& inputs,
                        const std::vector<ArtifactRef>& outputs) {
  json j;
  j["kind"] = "run_manifest";
  j["format_version"] = 1;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config;
  auto refs = [](const std::vector<ArtifactRef>& list) {
    json arr = json::array();
    for (const ArtifactRef& ref : list) {
      json entry{{"role", ref.role}, {"path", ref.path.string()}};
      if (std::filesystem::exists(ref.path)) {
        entry["fnv1a64"] = fnv1a64_file(ref.path);
      }
      arr.push_back(std::move(entry));
    }
    return arr;
  };
  j["inputs"] = refs(inputs);
  j["outputs"] = refs(outputs);
  write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace actgraph::run
