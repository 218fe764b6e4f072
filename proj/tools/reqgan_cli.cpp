// reqgan command-line front end. Talks to the library only through the C API.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "reqgan/reqgan.h"

#ifndef REQGAN_BUILD_ID
#define REQGAN_BUILD_ID "unknown"
#endif

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Failure {
  reqgan_status status;
  std::string message;
};

int exit_code_for(reqgan_status s) {
  switch (s) {
    case REQGAN_OK:
      return kExitOk;
    case REQGAN_ERR_CONFIG:
    case REQGAN_ERR_USAGE:
    case REQGAN_ERR_PARSE:
    case REQGAN_ERR_IO:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

void check(reqgan_status s, const std::string& context) {
  if (s != REQGAN_OK) {
    throw Failure{s, context + ": " + reqgan_last_error()};
  }
}

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using ConfigPtr = std::unique_ptr<reqgan_config, Deleter<reqgan_config, reqgan_config_destroy>>;
using SessionPtr =
    std::unique_ptr<reqgan_session, Deleter<reqgan_session, reqgan_session_destroy>>;
using DatasetPtr =
    std::unique_ptr<reqgan_dataset, Deleter<reqgan_dataset, reqgan_dataset_destroy>>;
using ImagesPtr = std::unique_ptr<reqgan_images, Deleter<reqgan_images, reqgan_images_destroy>>;

template <typename Fn>
std::string read_string(Fn&& fn, const std::string& context) {
  size_t needed = 0;
  check(fn(nullptr, 0, &needed), context);
  std::string s(needed + 1, '\0');
  check(fn(s.data(), s.size(), &needed), context);
  s.resize(needed);
  return s;
}

std::string config_get(const reqgan_config* c, const std::string& key) {
  return read_string(
      [&](char* b, size_t cap, size_t* n) { return reqgan_config_get(c, key.c_str(), b, cap, n); },
      key);
}

std::string render(const reqgan_config* c) {
  return read_string([&](char* b, size_t cap, size_t* n) { return reqgan_config_render(c, b, cap, n); },
                     "render config");
}

// Flags shared by train and ablate; each maps onto one config key.
struct Overrides {
  std::string config_path;
  std::optional<std::string> seed, epochs, d, layers, ablation, out, images, labels, klass;
  std::vector<std::string> sets;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file");
    app->add_option("--seed", seed, "train.seed");
    app->add_option("--epochs", epochs, "train.epochs");
    app->add_option("--d", d, "model.data_qubits");
    app->add_option("--layers", layers, "model.layers");
    app->add_option("--ablation", ablation,
                    "none | noise_uniform01 | noise_gauss | map_max | calib_knockout:<stage>");
    app->add_option("--out", out, "run.out");
    app->add_option("--dataset-images", images, "data.images");
    app->add_option("--dataset-labels", labels, "data.labels");
    app->add_option("--class", klass, "data.class");
    app->add_option("--set", sets, "any section.key=value override")->expected(0, -1);
  }

  ConfigPtr resolve() const {
    reqgan_config* raw = nullptr;
    check(reqgan_config_create(&raw), "config");
    ConfigPtr cfg(raw);
    if (!config_path.empty()) {
      check(reqgan_config_load_file(cfg.get(), config_path.c_str()), "config " + config_path);
    }
    auto apply = [&](const char* key, const std::optional<std::string>& v) {
      if (v) {
        check(reqgan_config_set(cfg.get(), key, v->c_str()), std::string("--") + key);
      }
    };
    apply("train.seed", seed);
    apply("train.epochs", epochs);
    apply("model.data_qubits", d);
    apply("model.layers", layers);
    apply("train.ablation", ablation);
    apply("run.out", out);
    apply("data.images", images);
    apply("data.labels", labels);
    apply("data.class", klass);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw Failure{REQGAN_ERR_USAGE, "--set expects key=value, got '" + kv + "'"};
      }
      check(reqgan_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()),
            "--set " + kv);
    }
    check(reqgan_config_validate(cfg.get()), "invalid configuration");
    return cfg;
  }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) {
    throw Failure{REQGAN_ERR_IO, "cannot write " + p.string()};
  }
  out << text;
}

void write_manifest(const fs::path& dir, const reqgan_config* cfg, const std::string& command) {
  std::string m = "# reqgan run manifest\n";
  m += "# build: " + std::string(REQGAN_BUILD_ID) + "\n";
  m += "# library: " + std::string(reqgan_version()) + "\n";
  m += "# command: " + command + "\n";
  m += "# layout: train_log.csv, metrics.csv, samples/epoch_NNNN_grid.*, checkpoint.bin\n";
  m += "# this file is a valid --config input reproducing the run\n\n";
  m += render(cfg);
  write_text(dir / "manifest.txt", m);
}

std::string csv_row(const reqgan_epoch_log& log) {
  return read_string(
      [&](char* b, size_t cap, size_t* n) { return reqgan_epoch_log_csv_row(&log, b, cap, n); },
      "csv");
}

struct Summary {
  double mean = 0.0;
  double std = 0.0;
};

Summary summarize(const std::vector<double>& v) {
  Summary s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.std += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(s.std / static_cast<double>(v.size()));
  return s;
}

struct EvalSummary {
  Summary mmd, frechet, brightness, contrast;
};

// Mean and std over `reruns` generation seeds.
EvalSummary evaluate_reruns(const reqgan_session* s, const reqgan_dataset* ds, size_t samples,
                            uint64_t seed, int reruns) {
  std::vector<double> mmd, fr, br, ct;
  for (int r = 0; r < reruns; ++r) {
    reqgan_eval_report rep{};
    check(reqgan_session_evaluate(s, ds, samples, seed + static_cast<uint64_t>(r), &rep),
          "evaluate");
    mmd.push_back(rep.pixel_mmd);
    fr.push_back(rep.pixel_frechet);
    br.push_back(rep.brightness_mean);
    ct.push_back(rep.contrast_mean);
  }
  return {summarize(mmd), summarize(fr), summarize(br), summarize(ct)};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string eval_csv_header() {
  return "pixel_mmd_mean,pixel_mmd_std,pixel_frechet_mean,pixel_frechet_std,"
         "brightness_mean,brightness_std,contrast_mean,contrast_std";
}

std::string eval_csv(const EvalSummary& e) {
  return fmt(e.mmd.mean) + "," + fmt(e.mmd.std) + "," + fmt(e.frechet.mean) + "," +
         fmt(e.frechet.std) + "," + fmt(e.brightness.mean) + "," + fmt(e.brightness.std) + "," +
         fmt(e.contrast.mean) + "," + fmt(e.contrast.std);
}

// Full training run into cfg's run.out; returns the trained session.
SessionPtr run_training(const reqgan_config* cfg, const reqgan_dataset* ds,
                        const std::string& command, bool quiet) {
  const fs::path out = config_get(cfg, "run.out");
  fs::create_directories(out / "samples");
  write_manifest(out, cfg, command);

  reqgan_session* raw = nullptr;
  check(reqgan_session_create(cfg, &raw), "session");
  SessionPtr session(raw);

  const auto epochs = std::stoull(config_get(cfg, "train.epochs"));
  const auto every = std::stoull(config_get(cfg, "run.montage_every"));
  const auto samples = std::stoull(config_get(cfg, "run.eval_samples"));
  const auto eval_seed = std::stoull(config_get(cfg, "run.eval_seed"));
  const auto format = config_get(cfg, "run.image_format");

  std::ofstream log(out / "train_log.csv");
  std::ofstream metrics(out / "metrics.csv");
  if (!log || !metrics) {
    throw Failure{REQGAN_ERR_IO, "cannot write logs under " + out.string()};
  }
  log << reqgan_epoch_log_csv_header() << "\n";
  metrics << "epoch,pixel_mmd,pixel_frechet,brightness_mean,brightness_std,contrast_mean,"
             "contrast_std\n";
  auto record_metrics = [&](uint64_t epoch) {
    reqgan_eval_report r{};
    check(reqgan_session_evaluate(session.get(), ds, samples, eval_seed, &r), "evaluate");
    metrics << epoch << "," << fmt(r.pixel_mmd) << "," << fmt(r.pixel_frechet) << ","
            << fmt(r.brightness_mean) << "," << fmt(r.brightness_std) << ","
            << fmt(r.contrast_mean) << "," << fmt(r.contrast_std) << "\n";
    metrics.flush();
  };
  record_metrics(0);

  for (uint64_t e = 1; e <= epochs; ++e) {
    reqgan_epoch_log row{};
    check(reqgan_session_train_epoch(session.get(), ds, &row), "epoch " + std::to_string(e));
    log << csv_row(row) << "\n";
    log.flush();
    record_metrics(row.epoch);
    if (!quiet) {
      std::printf("epoch %3llu  W=%.4f  Lc=%.4f  Lg=%.4f  acc=%.3f  bright=%.1f  contrast=%.1f  "
                  "mmd=%.4f  (%.1fs)\n",
                  static_cast<unsigned long long>(row.epoch), row.wasserstein_estimate,
                  row.critic_loss, row.generator_loss, row.mean_acceptance, row.mean_brightness,
                  row.mean_rms_contrast, row.pixel_mmd, row.wall_seconds);
      std::fflush(stdout);
    }
    if (every > 0 && (e % every == 0 || e == epochs)) {
      reqgan_images* im = nullptr;
      check(reqgan_session_generate(session.get(), 25, eval_seed, &im), "montage");
      ImagesPtr images(im);
      char prefix[32];
      std::snprintf(prefix, sizeof(prefix), "epoch_%04llu", static_cast<unsigned long long>(e));
      check(reqgan_images_export(images.get(), (out / "samples").c_str(), prefix, format.c_str(), 1),
            "export");
      // Only the grid is kept for snapshots.
      for (int i = 0; i < 25; ++i) {
        char name[48];
        std::snprintf(name, sizeof(name), "%s_%04d.%s", prefix, i, format.c_str());
        fs::remove(out / "samples" / name);
      }
    }
    check(reqgan_session_save(session.get(), (out / "checkpoint.bin").c_str()), "checkpoint");
  }
  return session;
}

DatasetPtr load_dataset(const reqgan_config* cfg) {
  for (const char* key : {"data.images", "data.labels"}) {
    const auto p = config_get(cfg, key);
    if (p.empty() || !fs::exists(p)) {
      throw Failure{REQGAN_ERR_IO, std::string(key) + ": file not found: '" + p + "'"};
    }
  }
  reqgan_dataset* raw = nullptr;
  check(reqgan_dataset_load(cfg, &raw), "dataset");
  return DatasetPtr(raw);
}

SessionPtr open_checkpoint(const std::string& path) {
  reqgan_session* raw = nullptr;
  check(reqgan_session_open(path.c_str(), &raw), "checkpoint " + path);
  return SessionPtr(raw);
}

std::string command_line(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    s += (i ? " " : "") + std::string(argv[i]);
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reqgan: quantum-GAN generator laboratory"};
  app.require_subcommand(1);

  // train
  Overrides train_opts;
  auto* train = app.add_subcommand("train", "train a generator/critic pair");
  train_opts.add_to(train);

  // generate
  std::string gen_ckpt, gen_out = "generated", gen_format = "pgm";
  size_t gen_count = 25;
  uint64_t gen_seed = 1;
  auto* generate = app.add_subcommand("generate", "sample images from a checkpoint");
  generate->add_option("--checkpoint", gen_ckpt)->required();
  generate->add_option("--count", gen_count);
  generate->add_option("--seed", gen_seed);
  generate->add_option("--out", gen_out);
  generate->add_option("--format", gen_format)->check(CLI::IsMember({"pgm", "png"}));

  // evaluate
  std::string ev_ckpt, ev_out;
  std::optional<std::string> ev_images, ev_labels, ev_class;
  int ev_reruns = 3;
  uint64_t ev_seed = 12345;
  std::optional<size_t> ev_samples;
  auto* evaluate = app.add_subcommand("evaluate", "pixel-MMD / pixel-Frechet / intensity stats");
  evaluate->add_option("--checkpoint", ev_ckpt)->required();
  evaluate->add_option("--out", ev_out, "CSV output (stdout when omitted)");
  evaluate->add_option("--dataset-images", ev_images);
  evaluate->add_option("--dataset-labels", ev_labels);
  evaluate->add_option("--class", ev_class);
  evaluate->add_option("--reruns", ev_reruns);
  evaluate->add_option("--seed", ev_seed);
  evaluate->add_option("--samples", ev_samples);

  // ablate
  std::string suite;
  Overrides ablate_opts;
  int ab_reruns = 3;
  auto* ablate = app.add_subcommand("ablate", "run an ablation suite");
  ablate->add_option("suite", suite, "noise | mapping | calibration")
      ->required()
      ->check(CLI::IsMember({"noise", "mapping", "calibration"}));
  ablate->add_option("--reruns", ab_reruns);
  ablate_opts.add_to(ablate);

  // inspect
  std::string in_ckpt;
  auto* inspect = app.add_subcommand("inspect", "print a checkpoint's config and tensor table");
  inspect->add_option("--checkpoint", in_ckpt)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) {
      const auto cfg = train_opts.resolve();
      const auto ds = load_dataset(cfg.get());
      run_training(cfg.get(), ds.get(), command_line(argc, argv), false);
      return kExitOk;
    }

    if (*generate) {
      const auto session = open_checkpoint(gen_ckpt);
      reqgan_images* raw = nullptr;
      check(reqgan_session_generate(session.get(), gen_count, gen_seed, &raw), "generate");
      ImagesPtr images(raw);
      check(reqgan_images_export(images.get(), gen_out.c_str(), "sample", gen_format.c_str(), 1),
            "export");
      std::printf("wrote %zu images to %s\n", gen_count, gen_out.c_str());
      return kExitOk;
    }

    if (*evaluate) {
      const auto session = open_checkpoint(ev_ckpt);
      reqgan_config* raw = nullptr;
      check(reqgan_session_config(session.get(), &raw), "config");
      ConfigPtr cfg(raw);
      if (ev_images) check(reqgan_config_set(cfg.get(), "data.images", ev_images->c_str()), "--dataset-images");
      if (ev_labels) check(reqgan_config_set(cfg.get(), "data.labels", ev_labels->c_str()), "--dataset-labels");
      if (ev_class) check(reqgan_config_set(cfg.get(), "data.class", ev_class->c_str()), "--class");
      const auto ds = load_dataset(cfg.get());
      const size_t samples =
          ev_samples ? *ev_samples : std::stoull(config_get(cfg.get(), "run.eval_samples"));
      const auto e = evaluate_reruns(session.get(), ds.get(), samples, ev_seed, ev_reruns);
      const std::string text = "epoch," + eval_csv_header() + "\n" +
                               std::to_string(reqgan_session_epoch(session.get())) + "," +
                               eval_csv(e) + "\n";
      if (ev_out.empty()) {
        std::fputs(text.c_str(), stdout);
      } else {
        write_text(ev_out, text);
      }
      return kExitOk;
    }

    if (*ablate) {
      const auto base = ablate_opts.resolve();
      const auto ds = load_dataset(base.get());
      std::vector<std::pair<std::string, std::string>> variants;
      if (suite == "noise") {
        variants = {{"uniform01", "noise_uniform01"}, {"gauss", "noise_gauss"}, {"learned", "none"}};
      } else if (suite == "mapping") {
        variants = {{"max_baseline", "map_max"}, {"calibrated", "none"}};
      } else {
        variants = {{"wo_smoothing", "calib_knockout:smoothing"},
                    {"wo_deviation", "calib_knockout:deviation"},
                    {"wo_normalization", "calib_knockout:normalization"},
                    {"wo_affine", "calib_knockout:affine"},
                    {"full", "none"}};
      }
      const fs::path root = config_get(base.get(), "run.out");
      fs::create_directories(root);
      const auto samples = std::stoull(config_get(base.get(), "run.eval_samples"));
      const auto eval_seed = std::stoull(config_get(base.get(), "run.eval_seed"));
      std::string csv = "variant,ablation," + eval_csv_header() + "\n";
      for (const auto& [name, mode] : variants) {
        reqgan_config* raw = nullptr;
        check(reqgan_config_create(&raw), "config");
        ConfigPtr cfg(raw);
        check(reqgan_config_parse(cfg.get(), render(base.get()).c_str()), "config copy");
        check(reqgan_config_set(cfg.get(), "train.ablation", mode.c_str()), "ablation");
        check(reqgan_config_set(cfg.get(), "run.out", (root / name).c_str()), "run.out");
        check(reqgan_config_validate(cfg.get()), "variant " + name);
        std::printf("== %s (%s)\n", name.c_str(), mode.c_str());
        const auto session = run_training(cfg.get(), ds.get(), command_line(argc, argv), false);
        const auto e = evaluate_reruns(session.get(), ds.get(), samples, eval_seed, ab_reruns);
        csv += name + "," + mode + "," + eval_csv(e) + "\n";
      }
      write_text(root / ("ablation_" + suite + ".csv"), csv);
      std::fputs(csv.c_str(), stdout);
      return kExitOk;
    }

    if (*inspect) {
      const auto session = open_checkpoint(in_ckpt);
      reqgan_config* raw = nullptr;
      check(reqgan_session_config(session.get(), &raw), "config");
      ConfigPtr cfg(raw);
      std::fputs(render(cfg.get()).c_str(), stdout);
      std::fputs("\n", stdout);
      std::fputs(read_string([&](char* b, size_t cap, size_t* n) {
                   return reqgan_session_describe(session.get(), b, cap, n);
                 }, "describe").c_str(),
                 stdout);
      return kExitOk;
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "reqgan: %s\n", f.message.c_str());
    return exit_code_for(f.status);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "reqgan: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
