#include "gridlab/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace gridlab {
namespace {

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<NamedTensor>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path);
  put<std::uint32_t>(out, kCheckpointMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& nt : tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(nt.name.size()));
    out.write(nt.name.data(), static_cast<std::streamsize>(nt.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(nt.t.rank()));
    for (auto d : nt.t.shape) put<std::int64_t>(out, d);
    out.write(reinterpret_cast<const char*>(nt.t.data.data()),
              static_cast<std::streamsize>(nt.t.data.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed: " + path);
}

std::vector<NamedTensor> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  if (get<std::uint32_t>(in) != kCheckpointMagic)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version));
  const auto count = get<std::uint32_t>(in);
  std::vector<NamedTensor> tensors;
  tensors.reserve(count);
  for (std::uint32_t t = 0; t < count; ++t) {
    const auto name_len = get<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rank = get<std::uint32_t>(in);
    std::vector<std::int64_t> shape(rank);
    for (auto& d : shape) d = get<std::int64_t>(in);
    Tensor tensor(shape);
    in.read(reinterpret_cast<char*>(tensor.data.data()),
            static_cast<std::streamsize>(tensor.data.size() * sizeof(float)));
    if (!in) throw std::runtime_error("checkpoint: truncated tensor data");
    tensors.push_back({std::move(name), std::move(tensor)});
  }
  return tensors;
}

}  // namespace gridlab
