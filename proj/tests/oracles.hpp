#pragma once
// Reference implementations used only by tests. Written directly from the
// math, without calling into the library's kernels.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;

template <typename T>
using MatT = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename T = double>
MatT<T> ry(T t) {
  MatT<T> m(2, 2);
  m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
  return m;
}

template <typename T = double>
MatT<T> rz(T t) {
  MatT<T> m = MatT<T>::Zero(2, 2);
  m(0, 0) = std::exp(std::complex<T>(0, -t / 2));
  m(1, 1) = std::exp(std::complex<T>(0, t / 2));
  return m;
}

template <typename T>
MatT<T> kron(const MatT<T>& a, const MatT<T>& b) {
  MatT<T> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Single-qubit gate on qubit q of n; qubit q is bit q, so the highest qubit
// is the leftmost kron factor.
template <typename T>
MatT<T> embed(const MatT<T>& g, int q, int n) {
  MatT<T> out = MatT<T>::Identity(1, 1);
  for (int k = n - 1; k >= 0; --k) out = kron<T>(out, k == q ? g : MatT<T>::Identity(2, 2));
  return out;
}

template <typename T = double>
MatT<T> cnot(int control, int target, int n) {
  const int dim = 1 << n;
  MatT<T> m = MatT<T>::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const int j = ((i >> control) & 1) ? (i ^ (1 << target)) : i;
    m(j, i) = 1;
  }
  return m;
}

template <typename T = double>
struct Dist {
  std::vector<T> probs;
  T acceptance = 0;
};

// Full circuit as one dense unitary applied to |0...0>, then enumeration of
// joint outcomes (data index i, ancilla b) and post-selection on b = 0.
template <typename T = double>
Dist<T> dense_circuit(const std::vector<T>& z, int D, int L, int R, const std::vector<T>& angles) {
  const int n = D + 1;
  MatT<T> U = MatT<T>::Identity(1 << n, 1 << n);
  for (int q = 0; q < D; ++q) U = embed<T>(ry<T>(z[q]), q, n) * U;
  for (int l = 0; l < L; ++l) {
    for (int q = 0; q < n; ++q) {
      const auto base = static_cast<std::size_t>((l * n + q) * R);
      U = embed<T>(ry<T>(angles[base]), q, n) * U;
      if (R == 2) U = embed<T>(rz<T>(angles[base + 1]), q, n) * U;
    }
    for (int q = 0; q < D; ++q) U = cnot<T>(q, q + 1, n) * U;
  }
  const auto psi = U.col(0);
  Dist<T> d;
  const int N = 1 << D;
  std::vector<T> joint(static_cast<std::size_t>(1) << n);
  for (int idx = 0; idx < (1 << n); ++idx) joint[idx] = std::norm(psi(idx));
  for (int i = 0; i < N; ++i) d.acceptance += joint[i];  // ancilla bit D clear
  for (int i = 0; i < N; ++i) d.probs.push_back(joint[i] / d.acceptance);
  return d;
}

inline std::vector<long double> widen(const std::vector<double>& v) { return {v.begin(), v.end()}; }

// Central difference of f along coordinate k of x.
inline double central_diff(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> x, std::size_t k, double h = 1e-5) {
  const double x0 = x[k];
  x[k] = x0 + h;
  const double fp = f(x);
  x[k] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2 * h);
}

// Same, for an extended-precision reference function.
inline double central_diff_ld(const std::function<long double(const std::vector<long double>&)>& f,
                              std::vector<long double> x, std::size_t k, long double h = 1e-5L) {
  const long double x0 = x[k];
  x[k] = x0 + h;
  const long double fp = f(x);
  x[k] = x0 - h;
  const long double fm = f(x);
  return static_cast<double>((fp - fm) / (2 * h));
}

// |a - n| / (|n| + 1e-8)
inline double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / (std::abs(numeric) + 1e-8);
}

// Dense layer y = act(W x + b), W out x in row-major in a flat vector.
inline std::vector<double> layer(const std::vector<double>& W, const std::vector<double>& b,
                                 const std::vector<double>& x, int act, double slope) {
  std::vector<double> y(b.size());
  for (std::size_t r = 0; r < b.size(); ++r) {
    double s = b[r];
    for (std::size_t c = 0; c < x.size(); ++c) s += W[r * x.size() + c] * x[c];
    if (act == 1) s = std::tanh(s);
    if (act == 2) s = s > 0 ? s : slope * s;
    y[r] = s;
  }
  return y;
}

// Walks a flat parameter vector laid out as [W0, b0, W1, b1, ...].
// act: 0 none, 1 tanh, 2 leaky relu (hidden layers only).
inline std::vector<double> mlp(const std::vector<double>& params,
                               const std::vector<std::size_t>& widths,
                               const std::vector<double>& x, int act, double slope = 0.2) {
  std::vector<double> h = x;
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto in = widths[l], out = widths[l + 1];
    std::vector<double> W(params.begin() + off, params.begin() + off + in * out);
    off += in * out;
    std::vector<double> b(params.begin() + off, params.begin() + off + out);
    off += out;
    h = layer(W, b, h, l + 2 == widths.size() ? 0 : act, slope);
  }
  return h;
}

// Finite-difference agreement with an absolute floor for gradients that
// vanish analytically and only carry roundoff numerically.
inline bool fd_close(double analytic, double numeric, double rtol, double atol) {
  return std::abs(analytic - numeric) <= rtol * std::abs(numeric) + atol;
}

template <typename T = double>
T sigmoid(T x) { return 1 / (1 + std::exp(-x)); }
template <typename T = double>
T softplus(T x) { return std::log(1 + std::exp(x)); }

// Calibration cascade written stage by stage from the formulas.
template <typename T = double>
std::vector<T> calibrate(const std::vector<T>& p, T alpha, T beta, T tau, T k, T eps_p, T eps_n) {
  const T N = static_cast<T>(p.size());
  std::vector<T> s(p.size());
  T sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += s[i] = std::pow(p[i] + eps_p, 1 / tau);
  for (auto& v : s) v /= sum;
  std::vector<T> x(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) x[i] = softplus<T>(k * (N * s[i] - 1)) - std::log(T(2));
  T mu = 0;
  for (T v : x) mu += v;
  mu /= N;
  T var = 0;
  for (T v : x) var += (v - mu) * (v - mu);
  const T sigma = std::sqrt(var / N);
  std::vector<T> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    out[i] = sigmoid<T>(alpha * (x[i] - mu) / (sigma + eps_n) + beta);
  return out;
}

inline double poly(const std::vector<double>& a, const std::vector<double>& b, int degree,
                   double coef, double scale) {
  double dot = 0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::pow(scale * dot + coef, degree);
}

// Unbiased MMD^2 by explicit double loops.
inline double mmd_bruteforce(const std::vector<std::vector<double>>& X,
                             const std::vector<std::vector<double>>& Y, int degree, double coef,
                             double scale) {
  const double m = static_cast<double>(X.size()), n = static_cast<double>(Y.size());
  double kxx = 0, kyy = 0, kxy = 0;
  for (std::size_t i = 0; i < X.size(); ++i)
    for (std::size_t j = 0; j < X.size(); ++j)
      if (i != j) kxx += poly(X[i], X[j], degree, coef, scale);
  for (std::size_t i = 0; i < Y.size(); ++i)
    for (std::size_t j = 0; j < Y.size(); ++j)
      if (i != j) kyy += poly(Y[i], Y[j], degree, coef, scale);
  for (const auto& x : X)
    for (const auto& y : Y) kxy += poly(x, y, degree, coef, scale);
  return kxx / (m * (m - 1)) + kyy / (n * (n - 1)) - 2 * kxy / (m * n);
}

// Frechet distance between Gaussians with diagonal covariances.
inline double frechet_diagonal(const std::vector<double>& mu_x, const std::vector<double>& var_x,
                               const std::vector<double>& mu_y, const std::vector<double>& var_y) {
  double d = 0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    d += (mu_x[i] - mu_y[i]) * (mu_x[i] - mu_y[i]);
    const double r = std::sqrt(var_x[i]) - std::sqrt(var_y[i]);
    d += r * r;
  }
  return d;
}

// n x n Sylvester-Hadamard matrix (n a power of two), entries +-1.
inline std::vector<std::vector<int>> hadamard(int n) {
  std::vector<std::vector<int>> h{{1}};
  while (static_cast<int>(h.size()) < n) {
    const auto s = h.size();
    std::vector<std::vector<int>> g(2 * s, std::vector<int>(2 * s));
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j) {
        g[i][j] = g[i][j + s] = g[i + s][j] = h[i][j];
        g[i + s][j + s] = -h[i][j];
      }
    h = g;
  }
  return h;
}

}  // namespace oracle
