#include "reqgan/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace reqgan::calibration {

namespace {

constexpr double kSoftplusZero = std::numbers::ln2;

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) {
    s += x;
  }
  return s / static_cast<double>(v.size());
}

double population_std(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) {
    s += (x - mean) * (x - mean);
  }
  return std::sqrt(s / static_cast<double>(v.size()));
}

std::size_t argmax(std::span<const double> p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

}  // namespace

std::string stage_name(Stage s) {
  switch (s) {
    case Stage::Smoothing:
      return "smoothing";
    case Stage::Deviation:
      return "deviation";
    case Stage::Normalization:
      return "normalization";
    case Stage::Affine:
      return "affine";
  }
  return "?";
}

Stage parse_stage(const std::string& name) {
  for (Stage s : kAllStages) {
    if (stage_name(s) == name) {
      return s;
    }
  }
  throw ConfigError("unknown calibration stage '" + name +
                    "' (expected smoothing, deviation, normalization or affine)");
}

std::vector<std::string> CalibrationConfig::problems() const {
  std::vector<std::string> out;
  if (on(Stage::Smoothing) && !(tau > 1.0)) {
    out.emplace_back("calibration.tau must be > 1 when smoothing is enabled");
  }
  if (!(k > 0.0)) {
    out.emplace_back("calibration.k must be > 0");
  }
  if (!(eps_p > 0.0)) {
    out.emplace_back("calibration.eps_p must be > 0");
  }
  if (!(eps_n > 0.0)) {
    out.emplace_back("calibration.eps_n must be > 0");
  }
  return out;
}

void CalibrationConfig::validate() const {
  const auto p = problems();
  if (!p.empty()) {
    std::string msg = p.front();
    for (std::size_t i = 1; i < p.size(); ++i) {
      msg += "; " + p[i];
    }
    throw ConfigError(msg);
  }
}

std::vector<double> smooth(std::span<const double> p, double tau, double eps_p) {
  if (!(tau > 1.0)) {
    throw ConfigError("smoothing temperature tau must be > 1");
  }
  std::vector<double> out(p.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = std::pow(p[i] + eps_p, 1.0 / tau);
    sum += out[i];
  }
  for (double& v : out) {
    v /= sum;
  }
  return out;
}

std::vector<double> deviation_map(std::span<const double> p_smooth, double k) {
  const double n = static_cast<double>(p_smooth.size());
  std::vector<double> x(p_smooth.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = n * p_smooth[i] - 1.0;
    x[i] = softplus(k * u) - kSoftplusZero;
  }
  return x;
}

std::vector<double> contrast_normalize(std::span<const double> x, double eps_n) {
  if (x.size() < 2) {
    throw UsageError("contrast normalisation needs at least two entries");
  }
  const double mu = mean_of(x);
  const double sd = population_std(x, mu);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = (x[i] - mu) / (sd + eps_n);
  }
  return out;
}

std::vector<double> affine_project(std::span<const double> x_bar, double alpha, double beta) {
  std::vector<double> out(x_bar.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = sigmoid(alpha * x_bar[i] + beta);
  }
  return out;
}

std::vector<double> max_normalize(std::span<const double> p) {
  const double m = p[argmax(p)];
  if (!(m > 0.0)) {
    throw NumericalError("max_normalize: distribution has no positive entry");
  }
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = p[i] / m;
  }
  return out;
}

CalibrationTape calibrate_tape(std::span<const double> p, double alpha, double beta,
                               const CalibrationConfig& cfg) {
  cfg.validate();
  CalibrationTape t;
  t.cfg = cfg;
  t.p.assign(p.begin(), p.end());
  const std::size_t n = p.size();

  if (cfg.on(Stage::Smoothing)) {
    t.smoothed.resize(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      t.smoothed[i] = std::pow(p[i] + cfg.eps_p, 1.0 / cfg.tau);
      sum += t.smoothed[i];
    }
    for (double& v : t.smoothed) {
      v /= sum;
    }
    t.smooth_sum = sum;
  } else {
    t.smoothed = t.p;
  }

  t.x = cfg.on(Stage::Deviation) ? deviation_map(t.smoothed, cfg.k) : t.smoothed;

  if (cfg.on(Stage::Normalization)) {
    t.mean = mean_of(t.x);
    t.stddev = population_std(t.x, t.mean);
    t.x_bar.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      t.x_bar[i] = (t.x[i] - t.mean) / (t.stddev + cfg.eps_n);
    }
  } else {
    t.x_bar = t.x;
  }

  t.alpha = cfg.on(Stage::Affine) ? alpha : 1.0;
  t.beta = cfg.on(Stage::Affine) ? beta : 0.0;
  t.pixels = affine_project(t.x_bar, t.alpha, t.beta);
  t.valid = true;
  return t;
}

std::vector<double> calibrate(std::span<const double> p, double alpha, double beta,
                              const CalibrationConfig& cfg) {
  return calibrate_tape(p, alpha, beta, cfg).pixels;
}

CalibrationGradients backward(const CalibrationTape& t, std::span<const double> grad_pixels) {
  if (!t.valid) {
    throw UsageError("calibration backward called without a forward pass");
  }
  const std::size_t n = t.p.size();
  if (grad_pixels.size() != n) {
    throw UsageError("calibration backward: gradient length mismatch");
  }
  const auto& cfg = t.cfg;
  CalibrationGradients g;

  // Projection and affine map.
  std::vector<double> d_xbar(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = t.pixels[i];
    const double dv = grad_pixels[i] * s * (1.0 - s);
    g.alpha += dv * t.x_bar[i];
    g.beta += dv;
    d_xbar[i] = dv * t.alpha;
  }
  if (!cfg.on(Stage::Affine)) {
    g.alpha = 0.0;
    g.beta = 0.0;
  }

  // Contrast normalisation; sigma's dependence on x is included.
  std::vector<double> d_x(n);
  if (cfg.on(Stage::Normalization)) {
    const double denom = t.stddev + cfg.eps_n;
    double mean_g = 0.0;
    double cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean_g += d_xbar[i];
      cov += d_xbar[i] * (t.x[i] - t.mean);
    }
    mean_g /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      double d = (d_xbar[i] - mean_g) / denom;
      if (t.stddev > 0.0) {
        const double dsigma = (t.x[i] - t.mean) / (static_cast<double>(n) * t.stddev);
        d -= cov / (denom * denom) * dsigma;
      }
      d_x[i] = d;
    }
  } else {
    d_x = d_xbar;
  }

  // Deviation modelling.
  std::vector<double> d_smooth(n);
  if (cfg.on(Stage::Deviation)) {
    const double nn = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = nn * t.smoothed[i] - 1.0;
      d_smooth[i] = d_x[i] * cfg.k * nn * sigmoid(cfg.k * u);
    }
  } else {
    d_smooth = d_x;
  }

  // Temperature smoothing with its renormalisation.
  g.probs.resize(n);
  if (cfg.on(Stage::Smoothing)) {
    double weighted = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      weighted += d_smooth[i] * t.smoothed[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double dq = (d_smooth[i] - weighted) / t.smooth_sum;
      const double q = t.smoothed[i] * t.smooth_sum;
      g.probs[i] = dq * q / (cfg.tau * (t.p[i] + cfg.eps_p));
    }
  } else {
    g.probs = d_smooth;
  }
  return g;
}

std::vector<double> max_normalize_backward(std::span<const double> p,
                                           std::span<const double> grad_pixels) {
  const std::size_t a = argmax(p);
  const double m = p[a];
  std::vector<double> g(p.size());
  double cross = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    g[i] = grad_pixels[i] / m;
    cross += grad_pixels[i] * p[i];
  }
  g[a] -= cross / (m * m);
  return g;
}

}  // namespace reqgan::calibration
