#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace reqgan {

// Error taxonomy. The C API maps each class onto a status code.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct UsageError : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};
struct DegeneratePostSelection : Error {
  using Error::Error;
};

using Rng = std::mt19937_64;

// Sampling helpers built on the raw engine output so that streams do not
// depend on the standard library's distribution implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Strictly inside (0, 1).
inline double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 12) + 0.5) * 0x1.0p-52;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_open01(rng);
}

// Box-Muller without caching the second variate; keeps the engine state the
// only state worth checkpointing.
double standard_normal(Rng& rng);

inline double sigmoid(double x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double l2_norm(std::span<const double> v);
bool all_finite(std::span<const double> v);

// Derives an independent seed from a base seed and a stream tag (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

}  // namespace reqgan
