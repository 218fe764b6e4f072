#pragma once

// Intensity calibration: conditional distribution -> pixels in (0,1).
//
//   smooth      p~ = (p + eps_p)^(1/tau) / sum
//   deviation   u = N p~ - 1,  x = softplus(k u) - softplus(0)
//   normalize   x_bar = (x - mu) / (sigma + eps_n)
//   affine      v = alpha x_bar + beta,  pixel = sigmoid(v)
//
// A disabled stage forwards its input unchanged (deviation off forwards p~
// itself; affine off fixes alpha = 1, beta = 0). The sigmoid always applies.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "reqgan/common.hpp"

namespace reqgan::calibration {

enum class Stage { Smoothing = 0, Deviation = 1, Normalization = 2, Affine = 3 };

inline constexpr std::array<Stage, 4> kAllStages{Stage::Smoothing, Stage::Deviation,
                                                 Stage::Normalization, Stage::Affine};

std::string stage_name(Stage s);
Stage parse_stage(const std::string& name);

struct CalibrationConfig {
  double tau = 2.0;
  double k = 5.0;
  double eps_p = 1e-8;
  double eps_n = 1e-6;
  std::array<bool, 4> enabled{true, true, true, true};

  bool on(Stage s) const { return enabled[static_cast<int>(s)]; }
  void set(Stage s, bool v) { enabled[static_cast<int>(s)] = v; }
  // Returns every violated constraint; empty when valid.
  std::vector<std::string> problems() const;
  void validate() const;
};

std::vector<double> smooth(std::span<const double> p, double tau, double eps_p);
std::vector<double> deviation_map(std::span<const double> p_smooth, double k);
std::vector<double> contrast_normalize(std::span<const double> x, double eps_n);
std::vector<double> affine_project(std::span<const double> x_bar, double alpha, double beta);
std::vector<double> max_normalize(std::span<const double> p);

struct CalibrationTape {
  CalibrationConfig cfg;
  std::vector<double> p;         // input distribution
  std::vector<double> smoothed;  // after stage 1
  double smooth_sum = 1.0;       // renormalisation denominator of stage 1
  std::vector<double> x;         // after stage 2
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> x_bar;  // after stage 3
  double alpha = 1.0;         // effective coefficients
  double beta = 0.0;
  std::vector<double> pixels;
  bool valid = false;
};

struct CalibrationGradients {
  std::vector<double> probs;
  double alpha = 0.0;
  double beta = 0.0;
};

CalibrationTape calibrate_tape(std::span<const double> p, double alpha, double beta,
                               const CalibrationConfig& cfg);
std::vector<double> calibrate(std::span<const double> p, double alpha, double beta,
                              const CalibrationConfig& cfg);
CalibrationGradients backward(const CalibrationTape& tape, std::span<const double> grad_pixels);

// Reverse pass of max_normalize; ties resolve to the first maximal index.
std::vector<double> max_normalize_backward(std::span<const double> p,
                                           std::span<const double> grad_pixels);

}  // namespace reqgan::calibration
