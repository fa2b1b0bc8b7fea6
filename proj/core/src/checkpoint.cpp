#include "actgraph/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace actgraph::num {

static_assert(std::numeric_limits<double>::is_iec559, "IEEE 754 doubles required");
static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'A', 'C', 'T', 'G', 'C', 'K', 'P', 'T'};

template <typename T>
void write_pod(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw std::runtime_error("truncated checkpoint file");
  return value;
}

void write_string(std::ostream& os, const std::string& s) {
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  const auto len = read_pod<std::uint32_t>(is);
  std::string s(len, '\0');
  is.read(s.data(), len);
  if (!is) throw std::runtime_error("truncated checkpoint file");
  return s;
}

}  // namespace

void Checkpoint::add(std::string name, Tensor tensor) {
  entries.emplace_back(std::move(name), std::move(tensor));
}

bool Checkpoint::contains(const std::string& name) const {
  for (const auto& [n, t] : entries) {
    if (n == name) return true;
  }
  return false;
}

const Tensor& Checkpoint::get(const std::string& name) const {
  for (const auto& [n, t] : entries) {
    if (n == name) return t;
  }
  throw std::runtime_error("checkpoint entry not found: " + name);
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(os, ckpt.format_version);
  write_pod<std::uint64_t>(os, ckpt.seed);
  write_string(os, ckpt.tag);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.entries.size()));
  for (const auto& [name, tensor] : ckpt.entries) {
    write_string(os, name);
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(tensor.ndim()));
    for (int d : tensor.shape()) write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    os.write(reinterpret_cast<const char*>(tensor.data()),
             static_cast<std::streamsize>(tensor.size() * sizeof(double)));
  }
  if (!os) throw std::runtime_error("checkpoint write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path.string());
  }
  Checkpoint ckpt;
  ckpt.format_version = read_pod<std::uint32_t>(is);
  if (ckpt.format_version != Checkpoint::kFormatVersion) {
    throw std::runtime_error("unsupported checkpoint format version " +
                             std::to_string(ckpt.format_version));
  }
  ckpt.seed = read_pod<std::uint64_t>(is);
  ckpt.tag = read_string(is);
  const auto n_entries = read_pod<std::uint32_t>(is);
  ckpt.entries.reserve(n_entries);
  for (std::uint32_t e = 0; e < n_entries; ++e) {
    std::string name = read_string(is);
    const auto ndim = read_pod<std::uint32_t>(is);
    std::vector<int> shape;
    shape.reserve(ndim);
    std::int64_t count = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      const auto dim = read_pod<std::uint32_t>(is);
      shape.push_back(static_cast<int>(dim));
      count *= dim;
    }
    std::vector<double> values(static_cast<std::size_t>(count));
    is.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) throw std::runtime_error("truncated checkpoint file");
    ckpt.add(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  return ckpt;
}

}  // namespace actgraph::num
