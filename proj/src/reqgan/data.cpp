#include "reqgan/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace reqgan::data {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t off) {
  if (off + 4 > b.size()) {
    throw ParseError("IDX: truncated header at byte offset " + std::to_string(off));
  }
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

std::string hex(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex;
  os.width(8);
  os.fill('0');
  os << v;
  return os.str();
}

void expect_magic(std::span<const std::uint8_t> b, std::uint32_t want, const char* what) {
  const std::uint32_t got = read_be32(b, 0);
  if (got != want) {
    throw ParseError(std::string("IDX ") + what + ": bad magic " + hex(got) + " at byte offset 0, expected " +
                     hex(want));
  }
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<double> parse_idx_images(std::span<const std::uint8_t> b, std::size_t* rows,
                                     std::size_t* cols, std::size_t* count) {
  expect_magic(b, kImageMagic, "images");
  const std::size_t n = read_be32(b, 4);
  const std::size_t r = read_be32(b, 8);
  const std::size_t c = read_be32(b, 12);
  const std::size_t need = 16 + n * r * c;
  if (b.size() < need) {
    throw ParseError("IDX images: truncated pixel data at byte offset " +
                     std::to_string(b.size()) + ", header promises " + std::to_string(need) +
                     " bytes");
  }
  if (b.size() > need) {
    throw ParseError("IDX images: " + std::to_string(b.size() - need) +
                     " trailing bytes after offset " + std::to_string(need));
  }
  std::vector<double> px(n * r * c);
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = static_cast<double>(b[16 + i]) / 255.0;
  }
  *rows = r;
  *cols = c;
  *count = n;
  return px;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> b) {
  expect_magic(b, kLabelMagic, "labels");
  const std::size_t n = read_be32(b, 4);
  if (b.size() != 8 + n) {
    throw ParseError("IDX labels: size mismatch at byte offset " + std::to_string(b.size()) +
                     ", header promises " + std::to_string(8 + n) + " bytes");
  }
  return {b.begin() + 8, b.end()};
}

RawImages load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  RawImages raw;
  const auto ib = read_file(images);
  raw.pixels = parse_idx_images(ib, &raw.rows, &raw.cols, &raw.count);
  raw.labels = parse_idx_labels(read_file(labels));
  if (raw.labels.size() != raw.count) {
    throw ParseError("IDX: image count " + std::to_string(raw.count) +
                     " does not match label count " + std::to_string(raw.labels.size()) +
                     " (label header at byte offset 4)");
  }
  return raw;
}

std::string policy_name(ResizePolicy p) {
  return p == ResizePolicy::PadCrop ? "pad_crop" : "downsample_pow2";
}

ResizePolicy parse_policy(const std::string& name) {
  if (name == "pad_crop") {
    return ResizePolicy::PadCrop;
  }
  if (name == "downsample_pow2") {
    return ResizePolicy::DownsamplePow2;
  }
  throw ConfigError("unknown resize policy '" + name + "' (expected pad_crop or downsample_pow2)");
}

int side_for_qubits(int data_qubits) {
  if (data_qubits < 2 || data_qubits % 2 != 0) {
    throw ConfigError("square images need an even number of data qubits >= 2, got " +
                      std::to_string(data_qubits));
  }
  return 1 << (data_qubits / 2);
}

ImageLayout ImageLayout::for_policy(int data_qubits, ResizePolicy policy, std::size_t src_side) {
  ImageLayout l;
  l.side = static_cast<std::size_t>(side_for_qubits(data_qubits));
  if (policy == ResizePolicy::PadCrop) {
    if (l.side < src_side) {
      throw ConfigError("pad_crop needs a canvas of at least " + std::to_string(src_side) +
                        " pixels per side; D=" + std::to_string(data_qubits) + " gives " +
                        std::to_string(l.side));
    }
    l.view_side = src_side;
    l.view_offset = (l.side - src_side) / 2;
  } else {
    l.view_side = l.side;
    l.view_offset = 0;
  }
  return l;
}

std::vector<double> ImageLayout::to_view(std::span<const double> canvas) const {
  if (is_identity()) {
    return {canvas.begin(), canvas.end()};
  }
  return crop_center(canvas, side, view_side);
}

std::vector<double> ImageLayout::from_view(std::span<const double> view) const {
  if (is_identity()) {
    return {view.begin(), view.end()};
  }
  return pad_center(view, view_side, side);
}

critic::Batch ImageLayout::to_view(const critic::Batch& canvas) const {
  critic::Batch out;
  out.count = canvas.count;
  out.width = view_pixels();
  out.pixels.reserve(out.count * out.width);
  for (std::size_t i = 0; i < canvas.count; ++i) {
    const auto v = to_view(canvas.row(i));
    out.pixels.insert(out.pixels.end(), v.begin(), v.end());
  }
  return out;
}

std::vector<double> area_resample(std::span<const double> src, std::size_t src_side,
                                  std::size_t dst_side) {
  // Each destination pixel averages the source area it covers, with
  // fractional weights for partially covered source pixels.
  const double scale = static_cast<double>(src_side) / static_cast<double>(dst_side);
  std::vector<double> w_axis;  // weights[d * src_side + s]
  w_axis.assign(dst_side * src_side, 0.0);
  for (std::size_t d = 0; d < dst_side; ++d) {
    const double lo = d * scale;
    const double hi = (d + 1) * scale;
    for (std::size_t s = 0; s < src_side; ++s) {
      const double overlap = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
      if (overlap > 0) {
        w_axis[d * src_side + s] = overlap / scale;
      }
    }
  }
  std::vector<double> out(dst_side * dst_side, 0.0);
  for (std::size_t dy = 0; dy < dst_side; ++dy) {
    for (std::size_t dx = 0; dx < dst_side; ++dx) {
      double acc = 0.0;
      for (std::size_t sy = 0; sy < src_side; ++sy) {
        const double wy = w_axis[dy * src_side + sy];
        if (wy == 0) {
          continue;
        }
        for (std::size_t sx = 0; sx < src_side; ++sx) {
          const double wx = w_axis[dx * src_side + sx];
          if (wx != 0) {
            acc += wy * wx * src[sy * src_side + sx];
          }
        }
      }
      out[dy * dst_side + dx] = std::clamp(acc, 0.0, 1.0);
    }
  }
  return out;
}

std::vector<double> pad_center(std::span<const double> src, std::size_t src_side,
                               std::size_t dst_side) {
  const std::size_t off = (dst_side - src_side) / 2;
  std::vector<double> out(dst_side * dst_side, 0.0);
  for (std::size_t y = 0; y < src_side; ++y) {
    std::copy_n(src.begin() + y * src_side, src_side, out.begin() + (y + off) * dst_side + off);
  }
  return out;
}

std::vector<double> crop_center(std::span<const double> src, std::size_t src_side,
                                std::size_t dst_side) {
  const std::size_t off = (src_side - dst_side) / 2;
  std::vector<double> out(dst_side * dst_side);
  for (std::size_t y = 0; y < dst_side; ++y) {
    std::copy_n(src.begin() + (y + off) * src_side + off, dst_side, out.begin() + y * dst_side);
  }
  return out;
}

PreparedData prepare(const DatasetSpec& spec) {
  return prepare(load_idx(spec.images, spec.labels), spec);
}

PreparedData prepare(const RawImages& raw, const DatasetSpec& spec) {
  if (raw.rows != raw.cols) {
    throw ConfigError("only square source images are supported");
  }
  const auto layout = ImageLayout::for_policy(spec.data_qubits, spec.policy, raw.rows);
  std::vector<std::size_t> matching;
  for (std::size_t i = 0; i < raw.count; ++i) {
    if (raw.labels[i] == spec.class_filter) {
      matching.push_back(i);
    }
  }
  const std::size_t need = spec.train_count + spec.test_count;
  if (matching.size() < need) {
    throw ConfigError("class " + std::to_string(spec.class_filter) + " has " +
                      std::to_string(matching.size()) + " images, need " + std::to_string(need));
  }
  Rng rng(derive_seed(spec.seed, 7));
  std::shuffle(matching.begin(), matching.end(), rng);
  matching.resize(need);

  const std::size_t src_px = raw.rows * raw.cols;
  auto build = [&](std::size_t begin, std::size_t end) {
    ImageSource s;
    s.layout = layout;
    s.orig_h = raw.rows;
    s.orig_w = raw.cols;
    s.images.count = end - begin;
    s.images.width = layout.canvas_pixels();
    s.images.pixels.reserve(s.images.count * s.images.width);
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t idx = matching[k];
      s.source_index.push_back(idx);
      std::span<const double> img(raw.pixels.data() + idx * src_px, src_px);
      const auto canvas = spec.policy == ResizePolicy::PadCrop
                              ? pad_center(img, raw.rows, layout.side)
                              : area_resample(img, raw.rows, layout.side);
      s.images.pixels.insert(s.images.pixels.end(), canvas.begin(), canvas.end());
    }
    return s;
  };
  PreparedData out;
  out.train = build(0, spec.train_count);
  out.test = build(spec.train_count, need);
  return out;
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t count, std::size_t batch_size,
                                                    std::uint64_t seed, std::uint64_t epoch) {
  if (batch_size == 0) {
    throw ConfigError("batch size must be at least 1");
  }
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 1000 + epoch));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < count; i += batch_size) {
    batches.emplace_back(order.begin() + i, order.begin() + std::min(count, i + batch_size));
  }
  return batches;
}

critic::Batch gather(const critic::Batch& source, std::span<const std::size_t> idx) {
  critic::Batch out;
  out.count = idx.size();
  out.width = source.width;
  out.pixels.reserve(out.count * out.width);
  for (std::size_t i : idx) {
    const auto r = source.row(i);
    out.pixels.insert(out.pixels.end(), r.begin(), r.end());
  }
  return out;
}

}  // namespace reqgan::data
