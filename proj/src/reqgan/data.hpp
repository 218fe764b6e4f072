#pragma once

// MNIST-style IDX ingestion, class filtering, seeded split, resolution
// adaptation to a 2^(D/2) x 2^(D/2) canvas, and batch iteration.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "reqgan/common.hpp"
#include "reqgan/critic.hpp"

namespace reqgan::data {

inline constexpr std::uint32_t kImageMagic = 0x00000803;
inline constexpr std::uint32_t kLabelMagic = 0x00000801;

struct RawImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> pixels;  // count x rows x cols, scaled to [0,1]
  std::vector<std::uint8_t> labels;
};

std::vector<double> parse_idx_images(std::span<const std::uint8_t> bytes, std::size_t* rows,
                                     std::size_t* cols, std::size_t* count);
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);
RawImages load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

enum class ResizePolicy { DownsamplePow2, PadCrop };

std::string policy_name(ResizePolicy p);
ResizePolicy parse_policy(const std::string& name);

// Maps a generator canvas (side x side = 2^D pixels) onto the region the
// critic and metrics look at.
struct ImageLayout {
  std::size_t side = 0;       // canvas side
  std::size_t view_offset = 0;
  std::size_t view_side = 0;  // visible square

  static ImageLayout for_policy(int data_qubits, ResizePolicy policy, std::size_t src_side = 28);

  std::size_t canvas_pixels() const { return side * side; }
  std::size_t view_pixels() const { return view_side * view_side; }
  bool is_identity() const { return view_side == side; }

  std::vector<double> to_view(std::span<const double> canvas) const;
  // Scatters a view-space gradient back onto the canvas (zeros outside).
  std::vector<double> from_view(std::span<const double> view) const;
  critic::Batch to_view(const critic::Batch& canvas) const;
};

int side_for_qubits(int data_qubits);

// Area-average resample of a square image.
std::vector<double> area_resample(std::span<const double> src, std::size_t src_side,
                                  std::size_t dst_side);
std::vector<double> pad_center(std::span<const double> src, std::size_t src_side,
                               std::size_t dst_side);
std::vector<double> crop_center(std::span<const double> src, std::size_t src_side,
                                std::size_t dst_side);

struct DatasetSpec {
  std::filesystem::path images;
  std::filesystem::path labels;
  int class_filter = 0;
  std::size_t train_count = 1000;
  std::size_t test_count = 250;
  int data_qubits = 10;
  ResizePolicy policy = ResizePolicy::PadCrop;
  std::uint64_t seed = 0;
};

struct ImageSource {
  ImageLayout layout;
  std::size_t orig_h = 0;
  std::size_t orig_w = 0;
  std::vector<std::size_t> source_index;  // index into the raw file
  critic::Batch images;                   // canvas pixels

  std::size_t size() const { return images.count; }
};

struct PreparedData {
  ImageSource train;
  ImageSource test;
};

PreparedData prepare(const DatasetSpec& spec);
PreparedData prepare(const RawImages& raw, const DatasetSpec& spec);

// Epoch order: shuffled with a seed derived from (seed, epoch); the final
// partial batch is kept.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t count, std::size_t batch_size,
                                                    std::uint64_t seed, std::uint64_t epoch);
critic::Batch gather(const critic::Batch& source, std::span<const std::size_t> idx);

}  // namespace reqgan::data
