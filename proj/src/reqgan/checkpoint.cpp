#include "reqgan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "reqgan/common.hpp"

namespace reqgan::checkpoint {

namespace {

std::uint64_t fnv1a(const char* p, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(p[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename T>
void put(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

void put_f64(std::string& out, double d) { put(out, std::bit_cast<std::uint64_t>(d)); }

void put_str(std::string& out, const std::string& s) {
  put(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  explicit Reader(const std::string& b) : b_(b) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }

  double f64(const char* what) { return std::bit_cast<double>(get<std::uint64_t>(what)); }

  std::string str(const char* what) {
    const auto n = get<std::uint32_t>(what);
    need(n, what);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }

  void need(std::size_t n, const char* what) const {
    if (n > b_.size() - pos_) {
      throw ParseError(std::string("checkpoint truncated while reading ") + what +
                       " at byte offset " + std::to_string(pos_));
    }
  }

 private:
  const std::string& b_;
  std::size_t pos_ = 0;
};

}  // namespace

const Tensor* Container::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) {
      return &t;
    }
  }
  return nullptr;
}

std::string encode(const Container& c) {
  std::string out(kMagic, sizeof(kMagic));
  put(out, c.version);
  put(out, c.epoch);
  put_str(out, c.config_text);
  put_str(out, c.rng_state);
  put(out, static_cast<std::uint32_t>(c.tensors.size()));
  for (const auto& t : c.tensors) {
    put_str(out, t.name);
    put(out, static_cast<std::uint32_t>(t.shape.size()));
    std::uint64_t n = 1;
    for (auto d : t.shape) {
      put(out, d);
      n *= d;
    }
    if (n != t.data.size()) {
      throw UsageError("checkpoint tensor " + t.name + " has data that does not match its shape");
    }
    for (double d : t.data) {
      put_f64(out, d);
    }
  }
  put(out, fnv1a(out.data(), out.size()));
  return out;
}

Container decode(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) + 8 ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("not a checkpoint file (bad magic at byte offset 0)");
  }
  const std::size_t body = bytes.size() - 8;
  Reader tail(bytes);
  std::uint64_t stored = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    stored |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[body + i])) << (8 * i);
  }
  if (stored != fnv1a(bytes.data(), body)) {
    throw ParseError("checkpoint checksum mismatch (file corrupted or truncated)");
  }
  const std::string payload = bytes.substr(0, body);
  Reader r(payload);
  r.need(sizeof(kMagic), "magic");
  for (std::size_t i = 0; i < sizeof(kMagic); ++i) {
    r.get<std::uint8_t>("magic");
  }
  Container c;
  c.version = r.get<std::uint32_t>("version");
  if (c.version != kVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(c.version) +
                     " (expected " + std::to_string(kVersion) + ")");
  }
  c.epoch = r.get<std::uint64_t>("epoch");
  c.config_text = r.str("config");
  c.rng_state = r.str("rng state");
  const auto count = r.get<std::uint32_t>("tensor count");
  for (std::uint32_t k = 0; k < count; ++k) {
    Tensor t;
    t.name = r.str("tensor name");
    const auto rank = r.get<std::uint32_t>("tensor rank");
    std::uint64_t n = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      t.shape.push_back(r.get<std::uint64_t>("tensor shape"));
      n *= t.shape.back();
    }
    r.need(n * 8, "tensor data");
    t.data.resize(n);
    for (auto& d : t.data) {
      d = r.f64("tensor data");
    }
    c.tensors.push_back(std::move(t));
  }
  if (r.pos() != payload.size()) {
    throw ParseError("checkpoint has trailing bytes at offset " + std::to_string(r.pos()));
  }
  return c;
}

void write(const std::filesystem::path& path, const Container& c) {
  const std::string bytes = encode(c);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot write checkpoint " + tmp.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw IoError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
  }
}

Container read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open checkpoint " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return decode(ss.str());
}

}  // namespace reqgan::checkpoint
