// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "reqgan/calibration.hpp"
#include "reqgan/critic.hpp"
#include "reqgan/data.hpp"
#include "reqgan/metrics.hpp"
#include "reqgan/quantum.hpp"
#include "reqgan/trainer.hpp"

using namespace reqgan;
namespace fs = std::filesystem;

namespace {

const fs::path kData = REQGAN_TEST_DATA;
constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> rand_vec(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(rng, lo, hi);
  return v;
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome quantum_gradients() {
  const auto t0 = Clock::now();
  Rng rng(101);
  const auto layout = quantum::CircuitLayout::linear_chain(2, 2);
  double worst = 0;
  for (int point = 0; point < 20; ++point) {
    const auto z = rand_vec(rng, 2, -kPi, kPi);
    const auto w = rand_vec(rng, layout.num_angles(), 0, 2 * kPi);
    // Differences taken on the extended precision dense reference.
    auto p0 = [&](const std::vector<long double>& zz, const std::vector<long double>& ww) {
      return oracle::dense_circuit<long double>(zz, 2, 2, 2, ww).probs[0];
    };
    const auto zl = oracle::widen(z), wl = oracle::widen(w);
    const auto g = quantum::backward(quantum::forward(z, layout, w), layout,
                                     std::vector<double>{1, 0, 0, 0});
    for (std::size_t k = 0; k < w.size(); ++k)
      worst = std::max(worst, oracle::rel_err(g.angles[k], oracle::central_diff_ld(
                                                                [&](const auto& x) { return p0(zl, x); }, wl, k)));
    for (std::size_t k = 0; k < z.size(); ++k)
      worst = std::max(worst, oracle::rel_err(g.z[k], oracle::central_diff_ld(
                                                           [&](const auto& x) { return p0(x, wl); }, zl, k)));
  }
  const double dt = seconds_since(t0);
  return {worst < 1e-4 && dt < 5, fmt("max rel err %.2e", worst) + fmt(", %.2fs", dt)};
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  Rng rng(202);
  double worst = 0;
  int trials = 0;
  for (int D = 1; D <= 3; ++D) {
    for (int t = 0; t < 100; ++t, ++trials) {
      const int L = 1 + t % 3;
      const auto layout = quantum::CircuitLayout::linear_chain(D, L);
      const auto z = rand_vec(rng, D, -kPi, kPi);
      const auto w = rand_vec(rng, layout.num_angles(), 0, 2 * kPi);
      const auto got = quantum::conditional_probs(
          quantum::apply_circuit(quantum::prepare_state(z, D), layout, w));
      const auto want = oracle::dense_circuit(z, D, L, 2, w);
      for (std::size_t i = 0; i < want.probs.size(); ++i)
        worst = std::max(worst, std::abs(got.probs[i] - want.probs[i]));
    }
  }
  const double dt = seconds_since(t0);
  return {worst <= 1e-10 && dt < 10,
          std::to_string(trials) + " trials, max abs diff " + fmt("%.2e", worst) + fmt(", %.2fs", dt)};
}

Outcome calibration_analytics() {
  calibration::CalibrationConfig cfg;
  bool ok = true;
  for (std::size_t n : {4u, 256u, 1024u}) {
    const std::vector<double> u(n, 1.0 / static_cast<double>(n));
    for (double v : calibration::calibrate(u, 1.7, 0.0, cfg)) ok &= v == 0.5;
    for (double v : calibration::deviation_map(u, cfg.k)) ok &= v == 0.0;
  }
  Rng rng(303);
  double worst_mean = 0;
  for (int t = 0; t < 100; ++t) {
    const auto x = rand_vec(rng, 64, -3, 3);
    double m = 0;
    for (double v : calibration::contrast_normalize(x, cfg.eps_n)) m += v / 64;
    worst_mean = std::max(worst_mean, std::abs(m));
  }
  double worst_jac = 0;
  for (std::size_t n : {4u, 16u}) {
    for (int t = 0; t < 5; ++t) {
      auto p = rand_vec(rng, n, 0.01, 1);
      double s = 0;
      for (double v : p) s += v;
      for (auto& v : p) v /= s;
      const double a = uniform(rng, 0.3, 2), b = uniform(rng, -1, 1);
      const auto tape = calibration::calibrate_tape(p, a, b, cfg);
      for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> e(n, 0.0);
        e[j] = 1;
        const auto g = calibration::backward(tape, e);
        auto f = [&](const std::vector<long double>& v) {
          return oracle::calibrate<long double>(v, a, b, cfg.tau, cfg.k, cfg.eps_p, cfg.eps_n)[j];
        };
        const auto pl = oracle::widen(p);
        for (std::size_t k = 0; k < n; ++k)
          worst_jac = std::max(worst_jac, oracle::rel_err(g.probs[k], oracle::central_diff_ld(f, pl, k, 1e-4L * pl[k])));
      }
    }
  }
  return {ok && worst_mean <= 1e-10 && worst_jac < 1e-4,
          std::string(ok ? "uniform->0.5 and zero deviation exact" : "uniform cases FAILED") +
              fmt(", max |mean| %.1e", worst_mean) + fmt(", max Jacobian rel err %.2e", worst_jac)};
}

Outcome wgan_gp_analytics() {
  Rng rng(404);
  auto linear = [&](double norm) {
    critic::Critic c(16, {});
    auto& p = c.net().params();
    double s = 0;
    for (std::size_t i = 0; i < 16; ++i) s += (p[i] = standard_normal(rng)) * p[i];
    for (std::size_t i = 0; i < 16; ++i) p[i] *= norm / std::sqrt(s);
    return c;
  };
  critic::Batch real{5, 16, rand_vec(rng, 80, 0, 1)}, fake{5, 16, rand_vec(rng, 80, 0, 1)};
  const auto eps = critic::draw_interpolation(rng, 5);
  const double p1 = critic::gradient_penalty(linear(1.0), real, fake, eps, 10.0);
  const double p3 = critic::gradient_penalty(linear(3.0), real, fake, eps, 10.0);
  return {std::abs(p1) <= 1e-12 && std::abs(p3 - 40.0) <= 1e-10,
          fmt("unit-norm penalty %.3e", p1) + fmt(", norm-3 penalty %.12f", p3)};
}

config::Config desk_config(std::uint64_t seed, const char* ablation) {
  config::Config c;
  c.model.data_qubits = 8;
  c.model.layers = 6;
  c.data.policy = data::ResizePolicy::DownsamplePow2;
  c.data.images = kData / "mnist-digit0-images-idx3-ubyte";
  c.data.labels = kData / "mnist-digit0-labels-idx1-ubyte";
  c.data.class_filter = 0;
  c.data.train_count = 800;
  c.data.test_count = 200;
  c.train.epochs = 10;
  c.train.seed = seed;
  c.train.ablation = config::Ablation::parse(ablation);
  c.run.eval_samples = 200;
  c.validate();
  return c;
}

// Mean pixel-MMD over three generation seeds, as the evaluate command reports.
double eval_mmd(const training::Trainer& t, const data::ImageSource& test) {
  double s = 0;
  for (std::uint64_t r = 0; r < 3; ++r) s += t.evaluate(test, 200, 12345 + r).pixel_mmd / 3;
  return s;
}

struct DeskRun {
  bool finite = true;
  std::string error;
  double mmd_start = 0, mmd_end = 0, brightness = 0, contrast = 0, seconds = 0;
};

DeskRun desk_run(std::uint64_t seed, const char* ablation) {
  DeskRun r;
  const auto t0 = Clock::now();
  try {
    const auto cfg = desk_config(seed, ablation);
    const auto d = data::prepare(cfg.dataset_spec());
    training::Trainer t(cfg);
    r.mmd_start = eval_mmd(t, d.test);
    for (std::uint64_t e = 0; e < cfg.train.epochs; ++e) {
      const auto log = t.train_epoch(d.train);
      for (double v : {log.wasserstein_estimate, log.critic_loss, log.generator_loss,
                       log.mean_acceptance, log.mean_brightness, log.mean_rms_contrast})
        r.finite &= std::isfinite(v);
    }
    r.mmd_end = eval_mmd(t, d.test);
    const auto stats = t.evaluate(d.test, 200, 12345).stats;
    r.brightness = stats.avg_brightness.mean;
    r.contrast = stats.rms_contrast.mean;
  } catch (const std::exception& e) {
    r.finite = false;
    r.error = e.what();
  }
  r.seconds = seconds_since(t0);
  return r;
}

Outcome training_smoke(const DeskRun& r) {
  if (!r.error.empty()) return {false, "aborted: " + r.error};
  const bool ok = r.finite && r.mmd_end < r.mmd_start && r.brightness > 5 && r.contrast > 5 &&
                  r.seconds < 1800;
  return {ok, fmt("pixel-MMD %.5f", r.mmd_start) + fmt(" -> %.5f", r.mmd_end) +
                  fmt(", brightness %.1f", r.brightness) + fmt(", contrast %.1f", r.contrast) +
                  fmt(", %.0fs", r.seconds)};
}

Outcome noise_ablation(const DeskRun& learned_seed1) {
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto learned = seed == 1 ? learned_seed1 : desk_run(seed, "none");
    const auto uniform = desk_run(seed, "noise_uniform01");
    if (!learned.error.empty() || !uniform.error.empty()) return {false, "run aborted"};
    const bool win = learned.mmd_end <= uniform.mmd_end;
    wins += win;
    detail += "seed " + std::to_string(seed) + fmt(": learned %.5f", learned.mmd_end) +
              fmt(" vs U(0,1) %.5f", uniform.mmd_end) + (win ? " (win)" : " (loss)") +
              (seed < 3 ? "; " : "");
  }
  return {wins >= 2, std::to_string(wins) + "/3 wins; " + detail};
}

Outcome determinism() {
  auto cfg = desk_config(9, "none");
  cfg.model.data_qubits = 4;
  cfg.model.layers = 2;
  cfg.data.train_count = 40;
  cfg.data.test_count = 10;
  const auto d = data::prepare(cfg.dataset_spec());
  auto params = [](const training::Trainer& t) {
    std::vector<double> p = t.generator().encoder().net().params();
    p.insert(p.end(), t.generator().angles().begin(), t.generator().angles().end());
    p.insert(p.end(), t.critic().net().params().begin(), t.critic().net().params().end());
    return p;
  };
  training::Trainer a(cfg), b(cfg);
  bool logs_equal = true;
  for (int e = 0; e < 2; ++e) {
    const auto la = a.train_epoch(d.train), lb = b.train_epoch(d.train);
    logs_equal &= training::csv_row({la.epoch, la.wasserstein_estimate, la.critic_loss,
                                     la.generator_loss, la.mean_acceptance, la.mean_brightness,
                                     la.mean_rms_contrast, la.generator_steps, la.critic_steps,
                                     la.aborted_batches}) ==
                  training::csv_row({lb.epoch, lb.wasserstein_estimate, lb.critic_loss,
                                     lb.generator_loss, lb.mean_acceptance, lb.mean_brightness,
                                     lb.mean_rms_contrast, lb.generator_steps, lb.critic_steps,
                                     lb.aborted_batches});
  }
  const bool rerun = logs_equal && params(a) == params(b);
  const auto path = fs::temp_directory_path() / "reqgan_acceptance.ckpt";
  training::Trainer c(cfg);
  c.train_epoch(d.train);
  c.save(path);
  auto resumed = training::Trainer::load(path);
  resumed.train_epoch(d.train);
  const bool resume = params(resumed) == params(a);
  return {rerun && resume, std::string("rerun ") + (rerun ? "bit-identical" : "DIFFERS") +
                               ", resume " + (resume ? "bit-identical" : "DIFFERS")};
}

Outcome metrics_correctness() {
  Rng rng(808);
  double worst_mmd = 0;
  for (int t = 0; t < 20; ++t) {
    metrics::FeatureSet x{10, 5, rand_vec(rng, 50, -1, 2)}, y{10, 5, rand_vec(rng, 50, -1, 2)};
    std::vector<std::vector<double>> xr, yr;
    for (std::size_t i = 0; i < 10; ++i) {
      xr.emplace_back(x.row(i).begin(), x.row(i).end());
      yr.emplace_back(y.row(i).begin(), y.row(i).end());
    }
    worst_mmd = std::max(worst_mmd, std::abs(metrics::mmd_poly(x, y) -
                                             oracle::mmd_bruteforce(xr, yr, 3, 1.0, 0.2)));
  }
  const auto h = oracle::hadamard(16);
  double worst_fr = 0;
  for (int t = 0; t < 10; ++t) {
    const std::size_t d = 5;
    metrics::FeatureSet x{16, d, std::vector<double>(16 * d)}, y = x;
    std::vector<double> mx(d), my(d), vx(d), vy(d);
    for (std::size_t j = 0; j < d; ++j) {
      mx[j] = uniform(rng, -1, 1);
      my[j] = uniform(rng, -1, 1);
      const double sx = uniform(rng, 0.1, 2), sy = uniform(rng, 0.1, 2);
      for (std::size_t i = 0; i < 16; ++i) {
        x.values[i * d + j] = mx[j] + sx * h[i][j + 1];
        y.values[i * d + j] = my[j] + sy * h[i][d + j + 1];
      }
      vx[j] = sx * sx * 16 / 15 + metrics::kFrechetRegularizer;
      vy[j] = sy * sy * 16 / 15 + metrics::kFrechetRegularizer;
    }
    worst_fr = std::max(worst_fr, std::abs(metrics::frechet_gaussian(x, y) -
                                           oracle::frechet_diagonal(mx, vx, my, vy)));
  }
  // Real-vs-real split halves against random re-splits of the pooled set.
  data::DatasetSpec spec;
  spec.images = kData / "mnist-digit0-images-idx3-ubyte";
  spec.labels = kData / "mnist-digit0-labels-idx1-ubyte";
  spec.train_count = 500;
  spec.test_count = 500;
  spec.data_qubits = 8;
  spec.policy = data::ResizePolicy::DownsamplePow2;
  const auto d = data::prepare(spec);
  const auto a = metrics::feature_map(d.train.images, 16), b = metrics::feature_map(d.test.images, 16);
  const double observed = std::abs(metrics::mmd_poly(a, b));
  std::vector<double> pooled = a.values;
  pooled.insert(pooled.end(), b.values.begin(), b.values.end());
  std::vector<double> null;
  Rng prng(809);
  std::vector<std::size_t> idx(1000);
  for (int t = 0; t < 100; ++t) {
    for (std::size_t i = 0; i < 1000; ++i) idx[i] = i;
    for (std::size_t i = 999; i > 0; --i) std::swap(idx[i], idx[prng() % (i + 1)]);
    metrics::FeatureSet x{500, a.dim, {}}, y{500, a.dim, {}};
    for (std::size_t i = 0; i < 1000; ++i) {
      auto& dst = i < 500 ? x.values : y.values;
      dst.insert(dst.end(), pooled.begin() + idx[i] * a.dim, pooled.begin() + (idx[i] + 1) * a.dim);
    }
    null.push_back(std::abs(metrics::mmd_poly(x, y)));
  }
  std::sort(null.begin(), null.end());
  const double floor95 = null[94];
  return {worst_mmd <= 1e-12 && worst_fr <= 1e-8 && observed < floor95,
          fmt("mmd vs brute force %.1e", worst_mmd) + fmt(", frechet vs diagonal %.1e", worst_fr) +
              fmt(", real-vs-real %.2e", observed) + fmt(" < floor %.2e", floor95)};
}

Outcome idx_parsing() {
  bool ok = true;
  std::string detail;
  try {
    const auto raw = data::load_idx(kData / "tiny-images-idx3-ubyte", kData / "tiny-labels-idx1-ubyte");
    const int want[] = {0, 255, 128, 1, 254, 64, 10, 20, 30, 40, 50, 255};
    ok &= raw.count == 2 && raw.rows == 3 && raw.cols == 2 &&
          raw.labels == std::vector<std::uint8_t>{7, 3};
    for (int i = 0; i < 12; ++i) ok &= raw.pixels[i] == want[i] / 255.0;
    detail = ok ? "fixture exact" : "fixture MISMATCH";
  } catch (const std::exception& e) {
    return {false, e.what()};
  }
  auto bytes = data::read_file(kData / "tiny-images-idx3-ubyte");
  auto expect_parse_error = [&](std::vector<std::uint8_t> b, const char* needle) {
    try {
      std::size_t r, c, n;
      data::parse_idx_images(b, &r, &c, &n);
      return false;
    } catch (const ParseError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
  };
  auto bad_magic = bytes;
  bad_magic[3] = 0x01;
  const bool magic = expect_parse_error(bad_magic, "0x00000803");
  const bool truncated = expect_parse_error({bytes.begin(), bytes.end() - 3}, "offset");
  ok &= magic && truncated;
  detail += std::string(", bad magic ") + (magic ? "rejected" : "NOT rejected") + ", truncation " +
            (truncated ? "rejected" : "NOT rejected");
  return {ok, detail};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int n, const char* name, const Outcome& o) {
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  };
  report(1, "quantum gradient fidelity", quantum_gradients());
  report(2, "oracle equivalence", oracle_equivalence());
  report(3, "calibration analytics", calibration_analytics());
  report(4, "WGAN-GP analytics", wgan_gp_analytics());
  const auto learned = desk_run(1, "none");
  report(5, "desk-scale training smoke", training_smoke(learned));
  report(6, "noise ablation direction", noise_ablation(learned));
  report(7, "determinism and checkpoint equivalence", determinism());
  report(8, "metrics correctness", metrics_correctness());
  report(9, "IDX parsing", idx_parsing());
  std::printf("%d of 9 criteria failed\n", failed);
  return failed;
}
