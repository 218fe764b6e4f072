#include "reqgan/reqgan.h"

#include <cstring>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "reqgan/config.hpp"
#include "reqgan/data.hpp"
#include "reqgan/metrics.hpp"
#include "reqgan/trainer.hpp"

struct reqgan_config {
  reqgan::config::Config cfg;
};

struct reqgan_dataset {
  reqgan::data::PreparedData data;
};

struct reqgan_session {
  std::optional<reqgan::training::Trainer> trainer;
};

struct reqgan_images {
  reqgan::critic::Batch batch;  // view-space pixels
  std::size_t side = 0;
};

namespace {

thread_local std::string g_last_error;

reqgan_status fail(reqgan_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
reqgan_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return REQGAN_OK;
  } catch (const reqgan::ConfigError& e) {
    return fail(REQGAN_ERR_CONFIG, e.what());
  } catch (const reqgan::UsageError& e) {
    return fail(REQGAN_ERR_USAGE, e.what());
  } catch (const reqgan::ParseError& e) {
    return fail(REQGAN_ERR_PARSE, e.what());
  } catch (const reqgan::IoError& e) {
    return fail(REQGAN_ERR_IO, e.what());
  } catch (const reqgan::NumericalError& e) {
    return fail(REQGAN_ERR_NUMERICAL, e.what());
  } catch (const reqgan::DegeneratePostSelection& e) {
    return fail(REQGAN_ERR_DEGENERATE, e.what());
  } catch (const std::exception& e) {
    return fail(REQGAN_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(REQGAN_ERR_INTERNAL, "unknown exception");
  }
}

void require(const void* p, const char* what) {
  if (!p) {
    throw reqgan::UsageError(std::string("null ") + what);
  }
}

void copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) {
    *needed = s.size();
  }
  if (buf && cap > 0) {
    const size_t n = std::min(cap - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
  }
}

reqgan_epoch_log to_c(const reqgan::training::EpochLog& l) {
  return {l.epoch,          l.wasserstein_estimate, l.critic_loss,     l.generator_loss,
          l.mean_acceptance, l.mean_brightness,     l.mean_rms_contrast, l.generator_steps,
          l.critic_steps,   l.aborted_batches,      l.wall_seconds,    l.pixel_mmd,
          l.pixel_frechet};
}

reqgan::training::EpochLog from_c(const reqgan_epoch_log& c) {
  reqgan::training::EpochLog l;
  l.epoch = c.epoch;
  l.wasserstein_estimate = c.wasserstein_estimate;
  l.critic_loss = c.critic_loss;
  l.generator_loss = c.generator_loss;
  l.mean_acceptance = c.mean_acceptance;
  l.mean_brightness = c.mean_brightness;
  l.mean_rms_contrast = c.mean_rms_contrast;
  l.generator_steps = c.generator_steps;
  l.critic_steps = c.critic_steps;
  l.aborted_batches = c.aborted_batches;
  l.wall_seconds = c.wall_seconds;
  l.pixel_mmd = c.pixel_mmd;
  l.pixel_frechet = c.pixel_frechet;
  return l;
}

reqgan_images* make_images(const reqgan::critic::Batch& canvas,
                           const reqgan::data::ImageLayout& layout) {
  auto im = std::make_unique<reqgan_images>();
  im->batch = layout.to_view(canvas);
  im->side = layout.view_side;
  return im.release();
}

const reqgan::training::Trainer& trainer_of(const reqgan_session* s) {
  require(s, "session");
  if (!s->trainer) {
    throw reqgan::UsageError("session has no model");
  }
  return *s->trainer;
}

}  // namespace

extern "C" {

const char* reqgan_version(void) { return "1.0.0"; }

const char* reqgan_last_error(void) { return g_last_error.c_str(); }

const char* reqgan_status_name(reqgan_status status) {
  switch (status) {
    case REQGAN_OK:
      return "ok";
    case REQGAN_ERR_CONFIG:
      return "config error";
    case REQGAN_ERR_USAGE:
      return "usage error";
    case REQGAN_ERR_PARSE:
      return "parse error";
    case REQGAN_ERR_IO:
      return "i/o error";
    case REQGAN_ERR_NUMERICAL:
      return "numerical error";
    case REQGAN_ERR_DEGENERATE:
      return "degenerate post-selection";
    case REQGAN_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

reqgan_status reqgan_config_create(reqgan_config** out) {
  return guarded([&] {
    require(out, "output pointer");
    *out = new reqgan_config();
  });
}

void reqgan_config_destroy(reqgan_config* cfg) { delete cfg; }

reqgan_status reqgan_config_load_file(reqgan_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg, "config");
    require(path, "path");
    cfg->cfg = reqgan::config::load(path, cfg->cfg);
  });
}

reqgan_status reqgan_config_parse(reqgan_config* cfg, const char* text) {
  return guarded([&] {
    require(cfg, "config");
    require(text, "text");
    cfg->cfg = reqgan::config::parse(text, cfg->cfg);
  });
}

reqgan_status reqgan_config_set(reqgan_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    require(value, "value");
    cfg->cfg.set(key, value);
  });
}

reqgan_status reqgan_config_get(const reqgan_config* cfg, const char* key, char* buf, size_t cap,
                                size_t* needed) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    copy_out(cfg->cfg.get(key), buf, cap, needed);
  });
}

reqgan_status reqgan_config_validate(const reqgan_config* cfg) {
  return guarded([&] {
    require(cfg, "config");
    cfg->cfg.validate();
  });
}

reqgan_status reqgan_config_render(const reqgan_config* cfg, char* buf, size_t cap,
                                   size_t* needed) {
  return guarded([&] {
    require(cfg, "config");
    copy_out(cfg->cfg.render(), buf, cap, needed);
  });
}

reqgan_status reqgan_dataset_load(const reqgan_config* cfg, reqgan_dataset** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "output pointer");
    cfg->cfg.validate();
    auto ds = std::make_unique<reqgan_dataset>();
    ds->data = reqgan::data::prepare(cfg->cfg.dataset_spec());
    *out = ds.release();
  });
}

void reqgan_dataset_destroy(reqgan_dataset* ds) { delete ds; }

size_t reqgan_dataset_train_size(const reqgan_dataset* ds) {
  return ds ? ds->data.train.size() : 0;
}

size_t reqgan_dataset_test_size(const reqgan_dataset* ds) {
  return ds ? ds->data.test.size() : 0;
}

reqgan_status reqgan_dataset_images(const reqgan_dataset* ds, int train, reqgan_images** out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "output pointer");
    const auto& src = train ? ds->data.train : ds->data.test;
    *out = make_images(src.images, src.layout);
  });
}

reqgan_status reqgan_session_create(const reqgan_config* cfg, reqgan_session** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "output pointer");
    auto s = std::make_unique<reqgan_session>();
    s->trainer.emplace(cfg->cfg);
    *out = s.release();
  });
}

reqgan_status reqgan_session_open(const char* checkpoint_path, reqgan_session** out) {
  return guarded([&] {
    require(checkpoint_path, "path");
    require(out, "output pointer");
    auto s = std::make_unique<reqgan_session>();
    s->trainer.emplace(reqgan::training::Trainer::load(checkpoint_path));
    *out = s.release();
  });
}

void reqgan_session_destroy(reqgan_session* s) { delete s; }

reqgan_status reqgan_session_save(const reqgan_session* s, const char* path) {
  return guarded([&] {
    require(path, "path");
    trainer_of(s).save(path);
  });
}

uint64_t reqgan_session_epoch(const reqgan_session* s) {
  return s && s->trainer ? s->trainer->epoch() : 0;
}

reqgan_status reqgan_session_config(const reqgan_session* s, reqgan_config** out) {
  return guarded([&] {
    require(out, "output pointer");
    auto c = std::make_unique<reqgan_config>();
    c->cfg = trainer_of(s).config();
    *out = c.release();
  });
}

reqgan_status reqgan_session_train_epoch(reqgan_session* s, const reqgan_dataset* ds,
                                         reqgan_epoch_log* out) {
  return guarded([&] {
    require(ds, "dataset");
    trainer_of(s);
    auto& t = *s->trainer;
    auto log = t.train_epoch(ds->data.train);
    const auto& run = t.config().run;
    if (run.eval_every_epoch) {
      const auto r = t.evaluate(ds->data.test, run.eval_samples, run.eval_seed);
      log.pixel_mmd = r.pixel_mmd;
      log.pixel_frechet = r.pixel_frechet;
    }
    if (out) {
      *out = to_c(log);
    }
  });
}

reqgan_status reqgan_session_generate(const reqgan_session* s, size_t count, uint64_t seed,
                                      reqgan_images** out) {
  return guarded([&] {
    require(out, "output pointer");
    const auto& t = trainer_of(s);
    *out = make_images(t.generate(count, seed), t.generator().image());
  });
}

reqgan_status reqgan_session_evaluate(const reqgan_session* s, const reqgan_dataset* ds,
                                      size_t samples, uint64_t seed, reqgan_eval_report* out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "output pointer");
    const auto& t = trainer_of(s);
    if (ds->data.test.images.width != t.generator().canvas_pixels()) {
      throw reqgan::ConfigError("dataset resolution does not match the checkpoint's generator");
    }
    const auto r = t.evaluate(ds->data.test, samples, seed);
    *out = {r.pixel_mmd,
            r.pixel_frechet,
            r.stats.avg_brightness.mean,
            r.stats.avg_brightness.std,
            r.stats.rms_contrast.mean,
            r.stats.rms_contrast.std};
  });
}

reqgan_status reqgan_session_describe(const reqgan_session* s, char* buf, size_t cap,
                                      size_t* needed) {
  return guarded([&] {
    const auto snap = trainer_of(s).snapshot();
    std::ostringstream os;
    os << "epoch " << snap.epoch << "\n";
    for (const auto& t : snap.tensors) {
      os << t.name << " [";
      for (std::size_t i = 0; i < t.shape.size(); ++i) {
        os << (i ? "," : "") << t.shape[i];
      }
      os << "]\n";
    }
    copy_out(os.str(), buf, cap, needed);
  });
}

void reqgan_images_destroy(reqgan_images* im) { delete im; }

size_t reqgan_images_count(const reqgan_images* im) { return im ? im->batch.count : 0; }

size_t reqgan_images_side(const reqgan_images* im) { return im ? im->side : 0; }

const double* reqgan_images_pixels(const reqgan_images* im) {
  return im ? im->batch.pixels.data() : nullptr;
}

reqgan_status reqgan_images_export(const reqgan_images* im, const char* dir, const char* prefix,
                                   const char* format, int montage) {
  return guarded([&] {
    require(im, "images");
    require(dir, "dir");
    require(prefix, "prefix");
    const std::string f = format ? format : "pgm";
    if (f != "pgm" && f != "png") {
      throw reqgan::UsageError("image format must be pgm or png");
    }
    reqgan::metrics::export_images(
        im->batch, im->side, dir, prefix,
        f == "pgm" ? reqgan::metrics::ImageFormat::Pgm : reqgan::metrics::ImageFormat::Png,
        montage != 0);
  });
}

reqgan_status reqgan_images_compare(const reqgan_images* a, const reqgan_images* b,
                                    double* pixel_mmd, double* pixel_frechet) {
  return guarded([&] {
    require(a, "images");
    require(b, "images");
    if (a->side != b->side) {
      throw reqgan::UsageError("image batches differ in resolution");
    }
    const auto fa = reqgan::metrics::feature_map(a->batch, a->side);
    const auto fb = reqgan::metrics::feature_map(b->batch, b->side);
    if (pixel_mmd) {
      *pixel_mmd = reqgan::metrics::mmd_poly(fa, fb);
    }
    if (pixel_frechet) {
      *pixel_frechet = reqgan::metrics::frechet_gaussian(fa, fb);
    }
  });
}

reqgan_status reqgan_images_stats(const reqgan_images* im, double* brightness_mean,
                                  double* brightness_std, double* contrast_mean,
                                  double* contrast_std) {
  return guarded([&] {
    require(im, "images");
    const auto st = reqgan::metrics::intensity_stats(im->batch);
    if (brightness_mean) *brightness_mean = st.avg_brightness.mean;
    if (brightness_std) *brightness_std = st.avg_brightness.std;
    if (contrast_mean) *contrast_mean = st.rms_contrast.mean;
    if (contrast_std) *contrast_std = st.rms_contrast.std;
  });
}

const char* reqgan_epoch_log_csv_header(void) {
  static const std::string header = reqgan::training::csv_header();
  return header.c_str();
}

reqgan_status reqgan_epoch_log_csv_row(const reqgan_epoch_log* log, char* buf, size_t cap,
                                       size_t* needed) {
  return guarded([&] {
    require(log, "log");
    copy_out(reqgan::training::csv_row(from_c(*log)), buf, cap, needed);
  });
}

}  // extern "C"
