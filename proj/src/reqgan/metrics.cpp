#include "reqgan/metrics.hpp"

#include <zlib.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace reqgan::metrics {

namespace {

MeanStd mean_std(std::span<const double> v) {
  MeanStd r;
  if (v.empty()) {
    return r;
  }
  for (double x : v) {
    r.mean += x;
  }
  r.mean /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) {
    s += (x - r.mean) * (x - r.mean);
  }
  r.std = std::sqrt(s / static_cast<double>(v.size()));
  return r;
}

Eigen::MatrixXd as_matrix(const FeatureSet& f) {
  Eigen::MatrixXd m(f.count, f.dim);
  for (std::size_t i = 0; i < f.count; ++i) {
    for (std::size_t j = 0; j < f.dim; ++j) {
      m(i, j) = f.values[i * f.dim + j];
    }
  }
  return m;
}

void fit_gaussian(const FeatureSet& f, Eigen::VectorXd& mu, Eigen::MatrixXd& cov) {
  const Eigen::MatrixXd m = as_matrix(f);
  mu = m.colwise().mean();
  const Eigen::MatrixXd centered = m.rowwise() - mu.transpose();
  cov = (centered.transpose() * centered) / static_cast<double>(f.count - 1);
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition failed");
  }
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double trace_sqrt_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd ra = psd_sqrt(a);
  Eigen::MatrixXd m = ra * b * ra;
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the covariance product failed");
  }
  return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

void put_be32(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>(v >> 24));
  s.push_back(static_cast<char>(v >> 16));
  s.push_back(static_cast<char>(v >> 8));
  s.push_back(static_cast<char>(v));
}

void png_chunk(std::string& out, const char* type, const std::string& payload) {
  put_be32(out, static_cast<std::uint32_t>(payload.size()));
  std::string body(type, 4);
  body += payload;
  out += body;
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                         static_cast<uInt>(body.size()));
  put_be32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

IntensityStats intensity_stats(const critic::Batch& images) {
  if (images.count == 0) {
    throw UsageError("intensity_stats: empty batch");
  }
  IntensityStats st;
  for (std::size_t i = 0; i < images.count; ++i) {
    const auto ms = mean_std(images.row(i));
    st.brightness.push_back(ms.mean * 255.0);
    st.contrast.push_back(ms.std * 255.0);
  }
  st.avg_brightness = mean_std(st.brightness);
  st.rms_contrast = mean_std(st.contrast);
  return st;
}

double poly_kernel(std::span<const double> a, std::span<const double> b, const PolyKernel& k) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
  }
  const double scale = k.scale > 0 ? k.scale : 1.0 / static_cast<double>(a.size());
  return std::pow(scale * dot + k.coef, k.degree);
}

double mmd_poly(const FeatureSet& x, const FeatureSet& y, const PolyKernel& kernel) {
  if (x.count < 2 || y.count < 2) {
    throw UsageError("mmd_poly needs at least two samples per set");
  }
  if (x.dim != y.dim) {
    throw UsageError("mmd_poly: feature dimensions differ");
  }
  const Eigen::MatrixXd mx = as_matrix(x);
  const Eigen::MatrixXd my = as_matrix(y);
  const double scale = kernel.scale > 0 ? kernel.scale : 1.0 / static_cast<double>(x.dim);
  auto gram = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd g = (scale * (a * b.transpose())).array() + kernel.coef;
    return Eigen::MatrixXd(g.array().pow(kernel.degree));
  };
  const Eigen::MatrixXd kxx = gram(mx, mx);
  const Eigen::MatrixXd kyy = gram(my, my);
  const Eigen::MatrixXd kxy = gram(mx, my);
  const double m = static_cast<double>(x.count);
  const double n = static_cast<double>(y.count);
  const double sxx = (kxx.sum() - kxx.trace()) / (m * (m - 1));
  const double syy = (kyy.sum() - kyy.trace()) / (n * (n - 1));
  const double sxy = kxy.sum() / (m * n);
  return sxx + syy - 2.0 * sxy;
}

double frechet_gaussian(const FeatureSet& x, const FeatureSet& y, double regularizer) {
  if (x.dim != y.dim) {
    throw UsageError("frechet_gaussian: feature dimensions differ");
  }
  if (x.count < 2 || y.count < 2) {
    throw UsageError("frechet_gaussian needs at least two samples per set");
  }
  Eigen::VectorXd mx, my;
  Eigen::MatrixXd cx, cy;
  fit_gaussian(x, mx, cx);
  fit_gaussian(y, my, cy);
  const auto eye = Eigen::MatrixXd::Identity(x.dim, x.dim);
  double reg = regularizer;
  for (int attempt = 0; attempt < 3; ++attempt) {
    const Eigen::MatrixXd ax = cx + reg * eye;
    const Eigen::MatrixXd ay = cy + reg * eye;
    try {
      const double tr = trace_sqrt_product(ax, ay);
      const double d = (mx - my).squaredNorm() + ax.trace() + ay.trace() - 2.0 * tr;
      if (std::isfinite(d)) {
        return d;
      }
    } catch (const NumericalError&) {
    }
    reg = reg > 0 ? reg * 100.0 : 1e-6;
  }
  throw NumericalError("frechet_gaussian: matrix square root failed after regularisation");
}

FeatureSet feature_map(const critic::Batch& images, std::size_t side) {
  constexpr std::size_t kBlock = 4;
  if (side * side != images.width || side % kBlock != 0) {
    throw ConfigError("feature_map: image side " + std::to_string(side) +
                      " must match the batch width and be a multiple of 4");
  }
  const std::size_t grid = side / kBlock;
  FeatureSet f;
  f.count = images.count;
  f.dim = grid * grid + 2;
  f.values.reserve(f.count * f.dim);
  for (std::size_t n = 0; n < images.count; ++n) {
    const auto img = images.row(n);
    for (std::size_t gy = 0; gy < grid; ++gy) {
      for (std::size_t gx = 0; gx < grid; ++gx) {
        double acc = 0.0;
        for (std::size_t y = 0; y < kBlock; ++y) {
          for (std::size_t x = 0; x < kBlock; ++x) {
            acc += img[(gy * kBlock + y) * side + gx * kBlock + x];
          }
        }
        f.values.push_back(acc / static_cast<double>(kBlock * kBlock));
      }
    }
    const auto ms = mean_std(img);
    f.values.push_back(ms.mean);
    f.values.push_back(ms.std);
  }
  return f;
}

std::uint8_t to_byte(double p) {
  const double v = std::floor(std::clamp(p, 0.0, 1.0) * 255.0 + 0.5);
  return static_cast<std::uint8_t>(v);
}

void write_pgm(const std::filesystem::path& path, std::span<const double> pixels,
               std::size_t width, std::size_t height) {
  std::string s = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  for (std::size_t i = 0; i < width * height; ++i) {
    s.push_back(static_cast<char>(to_byte(pixels[i])));
  }
  write_bytes(path, s);
}

std::vector<double> read_pgm(const std::filesystem::path& path, std::size_t* width,
                             std::size_t* height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || maxval != 255 || !in) {
    throw ParseError("not an 8-bit P5 PGM: " + path.string());
  }
  in.get();
  std::vector<char> buf(w * h);
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw ParseError("truncated PGM: " + path.string());
  }
  std::vector<double> px(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    px[i] = static_cast<unsigned char>(buf[i]) / 255.0;
  }
  *width = w;
  *height = h;
  return px;
}

void write_png(const std::filesystem::path& path, std::span<const double> pixels,
               std::size_t width, std::size_t height) {
  std::string raw;
  raw.reserve(height * (width + 1));
  for (std::size_t y = 0; y < height; ++y) {
    raw.push_back(0);  // filter: none
    for (std::size_t x = 0; x < width; ++x) {
      raw.push_back(static_cast<char>(to_byte(pixels[y * width + x])));
    }
  }
  uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
  std::string z(zlen, '\0');
  if (compress(reinterpret_cast<Bytef*>(z.data()), &zlen,
               reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size())) != Z_OK) {
    throw IoError("png compression failed for " + path.string());
  }
  z.resize(zlen);

  std::string out("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(width));
  put_be32(ihdr, static_cast<std::uint32_t>(height));
  ihdr += std::string("\x08\x00\x00\x00\x00", 5);  // 8-bit grayscale
  png_chunk(out, "IHDR", ihdr);
  png_chunk(out, "IDAT", z);
  png_chunk(out, "IEND", "");
  write_bytes(path, out);
}

Montage make_montage(const critic::Batch& images, std::size_t side) {
  Montage m;
  if (images.count == 0) {
    return m;
  }
  m.cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(images.count))));
  m.rows = (images.count + m.cols - 1) / m.cols;
  m.width = m.cols * side;
  m.height = m.rows * side;
  m.pixels.assign(m.width * m.height, 0.0);
  for (std::size_t n = 0; n < images.count; ++n) {
    const std::size_t ox = (n % m.cols) * side;
    const std::size_t oy = (n / m.cols) * side;
    const auto img = images.row(n);
    for (std::size_t y = 0; y < side; ++y) {
      std::copy_n(img.begin() + y * side, side, m.pixels.begin() + (oy + y) * m.width + ox);
    }
  }
  return m;
}

void export_images(const critic::Batch& images, std::size_t side,
                   const std::filesystem::path& dir, const std::string& prefix,
                   ImageFormat format, bool montage) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
  const char* ext = format == ImageFormat::Pgm ? ".pgm" : ".png";
  auto emit = [&](const std::filesystem::path& p, std::span<const double> px, std::size_t w,
                  std::size_t h) {
    if (format == ImageFormat::Pgm) {
      write_pgm(p, px, w, h);
    } else {
      write_png(p, px, w, h);
    }
  };
  for (std::size_t n = 0; n < images.count; ++n) {
    char name[32];
    std::snprintf(name, sizeof(name), "_%04zu", n);
    emit(dir / (prefix + name + ext), images.row(n), side, side);
  }
  if (montage && images.count > 0) {
    const auto m = make_montage(images, side);
    emit(dir / (prefix + "_grid" + ext), m.pixels, m.width, m.height);
  }
}

}  // namespace reqgan::metrics
