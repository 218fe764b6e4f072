#pragma once

// Evaluation: intensity statistics on the 0-255 scale, unbiased polynomial
// kernel MMD^2, Gaussian Frechet distance, pooled pixel features, and PGM/PNG
// export.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "reqgan/common.hpp"
#include "reqgan/critic.hpp"

namespace reqgan::metrics {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct IntensityStats {
  std::vector<double> brightness;  // per image, 0-255
  std::vector<double> contrast;    // per image, 0-255
  MeanStd avg_brightness;
  MeanStd rms_contrast;
};

IntensityStats intensity_stats(const critic::Batch& images);

// Row-major feature set: count x dim.
struct FeatureSet {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

struct PolyKernel {
  int degree = 3;
  double coef = 1.0;
  double scale = 0.0;  // <= 0 selects 1/dim
};

double poly_kernel(std::span<const double> a, std::span<const double> b, const PolyKernel& k);

// Unbiased MMD^2: off-diagonal means within each set, full cross mean.
double mmd_poly(const FeatureSet& x, const FeatureSet& y, const PolyKernel& kernel = {});

inline constexpr double kFrechetRegularizer = 1e-6;

// ||mu_x - mu_y||^2 + Tr(Sx + Sy - 2 (Sx Sy)^(1/2)) with reg * I added to
// both covariances; the root trace comes from the eigenvalues of the
// symmetric product Sx^(1/2) Sy Sx^(1/2).
double frechet_gaussian(const FeatureSet& x, const FeatureSet& y,
                        double regularizer = kFrechetRegularizer);

// 4x4 average-pooled pixels followed by the global mean and std.
FeatureSet feature_map(const critic::Batch& images, std::size_t side);

// Pixel value to byte: round half up of p * 255.
std::uint8_t to_byte(double p);

void write_pgm(const std::filesystem::path& path, std::span<const double> pixels,
               std::size_t width, std::size_t height);
std::vector<double> read_pgm(const std::filesystem::path& path, std::size_t* width,
                             std::size_t* height);
void write_png(const std::filesystem::path& path, std::span<const double> pixels,
               std::size_t width, std::size_t height);

struct Montage {
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;
};

// Near-square grid: cols = ceil(sqrt(count)), rows = ceil(count / cols).
Montage make_montage(const critic::Batch& images, std::size_t side);

enum class ImageFormat { Pgm, Png };

// Writes <prefix>_NNNN.<ext> per image plus <prefix>_grid.<ext>.
void export_images(const critic::Batch& images, std::size_t side,
                   const std::filesystem::path& dir, const std::string& prefix,
                   ImageFormat format, bool montage = true);

}  // namespace reqgan::metrics
