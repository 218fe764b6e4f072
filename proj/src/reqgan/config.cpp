#include "reqgan/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace reqgan::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return "";
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Shortest text that parses back to the same double.
std::string fmt_double(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) {
      break;
    }
  }
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw ConfigError(key + ": '" + v + "' is not a number");
  }
  return d;
}

template <typename T>
T parse_uint(const std::string& key, const std::string& v) {
  T out{};
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
    throw ConfigError(key + ": '" + v + "' is not a non-negative integer");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
    throw ConfigError(key + ": '" + v + "' is not an integer");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") {
    return true;
  }
  if (v == "false" || v == "0" || v == "no" || v == "off") {
    return false;
  }
  throw ConfigError(key + ": '" + v + "' is not a boolean");
}

std::vector<std::size_t> parse_widths(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  if (trim(v).empty()) {
    return out;
  }
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_uint<std::size_t>(key, trim(item)));
  }
  return out;
}

std::string fmt_widths(const std::vector<std::size_t>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    s += (i ? "," : "") + std::to_string(w[i]);
  }
  return s;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

struct Field {
  std::function<void(Config&, const std::string&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

#define REQGAN_DOUBLE(key, member)                                                       \
  {key,                                                                                \
   {[](Config& c, const std::string& k, const std::string& v) { c.member = parse_double(k, v); }, \
    [](const Config& c) { return fmt_double(c.member); }}}
#define REQGAN_UINT(key, member, T)                                                     \
  {key,                                                                               \
   {[](Config& c, const std::string& k, const std::string& v) { c.member = parse_uint<T>(k, v); }, \
    [](const Config& c) { return std::to_string(c.member); }}}
#define REQGAN_INT(key, member)                                                         \
  {key,                                                                               \
   {[](Config& c, const std::string& k, const std::string& v) { c.member = parse_int(k, v); }, \
    [](const Config& c) { return std::to_string(c.member); }}}
#define REQGAN_BOOL(key, member)                                                        \
  {key,                                                                               \
   {[](Config& c, const std::string& k, const std::string& v) { c.member = parse_bool(k, v); }, \
    [](const Config& c) { return fmt_bool(c.member); }}}
#define REQGAN_WIDTHS(key, member)                                                      \
  {key,                                                                               \
   {[](Config& c, const std::string& k, const std::string& v) { c.member = parse_widths(k, v); }, \
    [](const Config& c) { return fmt_widths(c.member); }}}
#define REQGAN_PATH(key, member)                                                        \
  {key,                                                                               \
   {[](Config& c, const std::string&, const std::string& v) { c.member = v; },         \
    [](const Config& c) { return c.member.string(); }}}

// Ordered: render() emits sections in this order.
const std::vector<std::pair<std::string, Field>>& field_table() {
  static const std::vector<std::pair<std::string, Field>> table = {
      REQGAN_INT("model.data_qubits", model.data_qubits),
      REQGAN_INT("model.layers", model.layers),
      REQGAN_INT("model.rotations", model.rotations),
      REQGAN_WIDTHS("model.encoder_hidden", model.encoder_hidden),
      REQGAN_DOUBLE("model.alpha_min", model.alpha_min),
      REQGAN_BOOL("model.positive_alpha", model.positive_alpha),
      REQGAN_WIDTHS("model.critic_hidden", model.critic_hidden),
      REQGAN_DOUBLE("model.leaky_slope", model.leaky_slope),

      REQGAN_UINT("train.epochs", train.epochs, std::uint64_t),
      REQGAN_UINT("train.batch_size", train.batch_size, std::size_t),
      REQGAN_DOUBLE("train.lr_critic", train.lr_critic),
      REQGAN_DOUBLE("train.lr_encoder", train.lr_encoder),
      REQGAN_DOUBLE("train.lr_pqc", train.lr_pqc),
      REQGAN_DOUBLE("train.adam_beta1", train.adam_beta1),
      REQGAN_DOUBLE("train.adam_beta2", train.adam_beta2),
      REQGAN_DOUBLE("train.adam_eps", train.adam_eps),
      REQGAN_INT("train.n_critic", train.n_critic),
      REQGAN_DOUBLE("train.lambda_gp", train.lambda_gp),
      REQGAN_UINT("train.seed", train.seed, std::uint64_t),
      {"train.ablation",
       {[](Config& c, const std::string&, const std::string& v) {
          c.train.ablation = Ablation::parse(v);
        },
        [](const Config& c) { return c.train.ablation.name(); }}},
      REQGAN_BOOL("train.linear_decay", train.linear_decay),
      REQGAN_INT("train.max_redraws", train.max_redraws),

      REQGAN_DOUBLE("calibration.tau", calibration.tau),
      REQGAN_DOUBLE("calibration.k", calibration.k),
      REQGAN_DOUBLE("calibration.eps_p", calibration.eps_p),
      REQGAN_DOUBLE("calibration.eps_n", calibration.eps_n),
      REQGAN_BOOL("calibration.smoothing", calibration.enabled[0]),
      REQGAN_BOOL("calibration.deviation", calibration.enabled[1]),
      REQGAN_BOOL("calibration.normalization", calibration.enabled[2]),
      REQGAN_BOOL("calibration.affine", calibration.enabled[3]),

      REQGAN_PATH("data.images", data.images),
      REQGAN_PATH("data.labels", data.labels),
      REQGAN_INT("data.class", data.class_filter),
      REQGAN_UINT("data.train_count", data.train_count, std::size_t),
      REQGAN_UINT("data.test_count", data.test_count, std::size_t),
      {"data.resize",
       {[](Config& c, const std::string&, const std::string& v) {
          c.data.policy = data::parse_policy(v);
        },
        [](const Config& c) { return data::policy_name(c.data.policy); }}},

      REQGAN_PATH("run.out", run.out),
      REQGAN_UINT("run.montage_every", run.montage_every, std::uint64_t),
      REQGAN_UINT("run.eval_samples", run.eval_samples, std::size_t),
      REQGAN_UINT("run.eval_seed", run.eval_seed, std::uint64_t),
      REQGAN_BOOL("run.eval_every_epoch", run.eval_every_epoch),
      {"run.image_format",
       {[](Config& c, const std::string& k, const std::string& v) {
          if (v != "pgm" && v != "png") {
            throw ConfigError(k + ": '" + v + "' must be pgm or png");
          }
          c.run.image_format = v;
        },
        [](const Config& c) { return c.run.image_format; }}},
  };
  return table;
}

#undef REQGAN_DOUBLE
#undef REQGAN_UINT
#undef REQGAN_INT
#undef REQGAN_BOOL
#undef REQGAN_WIDTHS
#undef REQGAN_PATH

const Field& field(const std::string& key) {
  for (const auto& [k, f] : field_table()) {
    if (k == key) {
      return f;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

std::string Ablation::name() const {
  switch (kind) {
    case AblationKind::None:
      return "none";
    case AblationKind::NoiseUniform01:
      return "noise_uniform01";
    case AblationKind::NoiseGauss:
      return "noise_gauss";
    case AblationKind::MapMax:
      return "map_max";
    case AblationKind::CalibKnockout:
      return "calib_knockout:" + calibration::stage_name(stage);
  }
  return "?";
}

Ablation Ablation::parse(const std::string& text) {
  Ablation a;
  if (text == "none") {
    a.kind = AblationKind::None;
  } else if (text == "noise_uniform01") {
    a.kind = AblationKind::NoiseUniform01;
  } else if (text == "noise_gauss") {
    a.kind = AblationKind::NoiseGauss;
  } else if (text == "map_max") {
    a.kind = AblationKind::MapMax;
  } else if (text.rfind("calib_knockout:", 0) == 0) {
    a.kind = AblationKind::CalibKnockout;
    a.stage = calibration::parse_stage(text.substr(15));
  } else {
    throw ConfigError("unknown ablation mode '" + text +
                      "' (expected none, noise_uniform01, noise_gauss, map_max or "
                      "calib_knockout:<stage>)");
  }
  return a;
}

calibration::CalibrationConfig Config::effective_calibration() const {
  auto c = calibration;
  if (train.ablation.kind == AblationKind::CalibKnockout) {
    c.set(train.ablation.stage, false);
  }
  return c;
}

data::DatasetSpec Config::dataset_spec() const {
  data::DatasetSpec s;
  s.images = data.images;
  s.labels = data.labels;
  s.class_filter = data.class_filter;
  s.train_count = data.train_count;
  s.test_count = data.test_count;
  s.data_qubits = model.data_qubits;
  s.policy = data.policy;
  s.seed = train.seed;
  return s;
}

optim::AdamHyper Config::adam(double lr) const {
  return {lr, train.adam_beta1, train.adam_beta2, train.adam_eps};
}

void Config::set(const std::string& key, const std::string& value) {
  field(key).set(*this, key, trim(value));
}

std::string Config::get(const std::string& key) const { return field(key).get(*this); }

const std::vector<std::string>& Config::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& [name, f] : field_table()) {
      out.push_back(name);
    }
    return out;
  }();
  return k;
}

std::vector<std::string> Config::problems() const {
  std::vector<std::string> p;
  const auto& m = model;
  if (m.data_qubits < 1) {
    p.emplace_back("model.data_qubits must be >= 1");
  } else if (m.data_qubits % 2 != 0) {
    p.emplace_back("model.data_qubits must be even (square images)");
  } else if (m.data_qubits > 20) {
    p.emplace_back("model.data_qubits must be <= 20 for dense simulation");
  }
  if (m.layers < 1) {
    p.emplace_back("model.layers must be >= 1");
  }
  if (m.rotations != 1 && m.rotations != 2) {
    p.emplace_back("model.rotations must be 1 or 2");
  }
  if (m.positive_alpha && !(m.alpha_min > 0)) {
    p.emplace_back("model.alpha_min must be > 0");
  }
  for (auto w : m.encoder_hidden) {
    if (w == 0) p.emplace_back("model.encoder_hidden widths must be positive");
  }
  for (auto w : m.critic_hidden) {
    if (w == 0) p.emplace_back("model.critic_hidden widths must be positive");
  }
  if (!(m.leaky_slope >= 0 && m.leaky_slope < 1)) {
    p.emplace_back("model.leaky_slope must be in [0, 1)");
  }
  const auto& t = train;
  if (t.epochs < 1) p.emplace_back("train.epochs must be >= 1");
  if (t.batch_size < 1) p.emplace_back("train.batch_size must be >= 1");
  if (!(t.lr_critic > 0)) p.emplace_back("train.lr_critic must be > 0");
  if (!(t.lr_encoder > 0)) p.emplace_back("train.lr_encoder must be > 0");
  if (!(t.lr_pqc > 0)) p.emplace_back("train.lr_pqc must be > 0");
  if (!(t.adam_beta1 >= 0 && t.adam_beta1 < 1)) p.emplace_back("train.adam_beta1 must be in [0, 1)");
  if (!(t.adam_beta2 > 0 && t.adam_beta2 < 1)) p.emplace_back("train.adam_beta2 must be in (0, 1)");
  if (!(t.adam_eps > 0)) p.emplace_back("train.adam_eps must be > 0");
  if (t.n_critic < 1) p.emplace_back("train.n_critic must be >= 1");
  if (!(t.lambda_gp >= 0)) p.emplace_back("train.lambda_gp must be >= 0");
  if (t.max_redraws < 0) p.emplace_back("train.max_redraws must be >= 0");
  for (const auto& c : effective_calibration().problems()) {
    p.push_back(c);
  }
  if (data.class_filter < 0 || data.class_filter > 255) {
    p.emplace_back("data.class must be in [0, 255]");
  }
  if (data.train_count < 1) p.emplace_back("data.train_count must be >= 1");
  if (data.test_count < 2) p.emplace_back("data.test_count must be >= 2");
  if (data.policy == data::ResizePolicy::PadCrop && m.data_qubits >= 2 && m.data_qubits % 2 == 0 &&
      (1 << (m.data_qubits / 2)) < 28) {
    p.emplace_back("data.resize = pad_crop needs model.data_qubits >= 10 for 28x28 sources");
  }
  if (run.eval_samples < 2) p.emplace_back("run.eval_samples must be >= 2");
  return p;
}

void Config::validate() const {
  const auto p = problems();
  if (!p.empty()) {
    throw ConfigError(join_problems(p));
  }
}

std::string Config::render() const {
  std::string out;
  std::string section;
  for (const auto& [key, f] : field_table()) {
    const auto dot = key.find('.');
    const auto sec = key.substr(0, dot);
    if (sec != section) {
      out += (section.empty() ? "" : "\n") + std::string("[") + sec + "]\n";
      section = sec;
    }
    out += key.substr(dot + 1) + " = " + f.get(*this) + "\n";
  }
  return out;
}

Config parse(const std::string& text, Config base) {
  std::vector<std::string> errors;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const auto name = trim(line.substr(0, eq));
    const auto key = name.find('.') == std::string::npos && !section.empty() ? section + "." + name
                                                                             : name;
    try {
      base.set(key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      errors.push_back("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!errors.empty()) {
    throw ConfigError(join_problems(errors));
  }
  return base;
}

Config load(const std::filesystem::path& path, Config base) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), std::move(base));
}

std::string join_problems(const std::vector<std::string>& problems) {
  std::string s;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    s += (i ? "\n" : "") + problems[i];
  }
  return s;
}

}  // namespace reqgan::config
