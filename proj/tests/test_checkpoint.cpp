#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "actgraph/checkpoint.hpp"
#include "actgraph/rng.hpp"

using namespace actgraph::num;
using actgraph::Rng;

namespace {

std::string file_bytes(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("checkpoint round-trip is byte-exact") {
  Rng rng(2024);
  Checkpoint ckpt;
  ckpt.seed = 0xfeedface12345678ULL;
  ckpt.tag = "tubelet_soft";
  for (int e = 0; e < 6; ++e) {
    const int r = 1 + rng.uniform_int(5), c = 1 + rng.uniform_int(7);
    Tensor t({r, c});
    for (std::int64_t i = 0; i < t.size(); ++i) t.at(static_cast<int>(i)) = rng.normal(0.0, 3.0);
    ckpt.add("param_" + std::to_string(e), std::move(t));
  }
  ckpt.add("vector_param", Tensor({9}, {1, -2, 3.5, 0, 5, -6.25, 7, 8, 1e-300}));

  const auto dir = std::filesystem::temp_directory_path() / "actgraph_ckpt_test";
  std::filesystem::create_directories(dir);
  const auto path_a = dir / "a.ckpt";
  const auto path_b = dir / "b.ckpt";
  save_checkpoint(ckpt, path_a);
  const Checkpoint loaded = load_checkpoint(path_a);

  CHECK(loaded.seed == ckpt.seed);
  CHECK(loaded.tag == ckpt.tag);
  REQUIRE(loaded.entries.size() == ckpt.entries.size());
  for (std::size_t i = 0; i < ckpt.entries.size(); ++i) {
    CHECK(loaded.entries[i].first == ckpt.entries[i].first);
    CHECK(loaded.entries[i].second == ckpt.entries[i].second);
  }

  save_checkpoint(loaded, path_b);
  CHECK(file_bytes(path_a) == file_bytes(path_b));
  std::filesystem::remove_all(dir);
}

TEST_CASE("checkpoint loader rejects foreign files") {
  const auto dir = std::filesystem::temp_directory_path() / "actgraph_ckpt_test2";
  std::filesystem::create_directories(dir);
  const auto path = dir / "not_a.ckpt";
  {
    std::ofstream os(path, std::ios::binary);
    os << "definitely not a checkpoint";
  }
  CHECK_THROWS(load_checkpoint(path));
  CHECK_THROWS(load_checkpoint(dir / "missing.ckpt"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("checkpoint entry lookup") {
  Checkpoint ckpt;
  ckpt.add("w", Tensor::scalar(2.0));
  CHECK(ckpt.contains("w"));
  CHECK_FALSE(ckpt.contains("b"));
  CHECK(ckpt.get("w").scalar_value() == 2.0);
  CHECK_THROWS(ckpt.get("b"));
}
