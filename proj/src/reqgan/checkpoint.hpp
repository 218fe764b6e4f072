#pragma once

// Versioned binary checkpoint container (little-endian):
//
//   "RQGANCKP"                       8 bytes magic
//   u32 version                      currently 1
//   u64 epoch
//   u32 n, n bytes                   resolved config text
//   u32 n, n bytes                   RNG engine state (text form)
//   u32 tensor_count
//   per tensor: u32 name_len, name, u32 rank, u64 dims[rank], f64 data[prod(dims)]
//   u64 FNV-1a 64 checksum of every preceding byte
//
// See docs/checkpoint_format.md.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace reqgan::checkpoint {

inline constexpr char kMagic[8] = {'R', 'Q', 'G', 'A', 'N', 'C', 'K', 'P'};
inline constexpr std::uint32_t kVersion = 1;

struct Tensor {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> data;
};

struct Container {
  std::uint32_t version = kVersion;
  std::uint64_t epoch = 0;
  std::string config_text;
  std::string rng_state;
  std::vector<Tensor> tensors;

  const Tensor* find(const std::string& name) const;
};

std::string encode(const Container& c);
Container decode(const std::string& bytes);

// Writes to a sibling temp file and renames over the target.
void write(const std::filesystem::path& path, const Container& c);
Container read(const std::filesystem::path& path);

}  // namespace reqgan::checkpoint
