// SPDX-License-Identifier: Apache-2.0
#include "floeberg/floeberg.h"

#include "common/error.hpp"
#include "geo/projection.hpp"
#include "geo/raster.hpp"
#include "nnet/model.hpp"
#include "nnet/model_io.hpp"
#include "pipeline/commands.hpp"
#include "pipeline/config.hpp"
#include "surface/surface.hpp"

#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

using namespace floeberg;

struct floeberg_context {
  pipeline::PipelineConfig config;
  std::string log;
  std::vector<std::string> products;
};

struct floeberg_model {
  nnet::Model model;
};

namespace {

thread_local std::string last_error;

floeberg_status status_of(ErrorKind k) {
  switch (k) {
  case ErrorKind::InvalidInput: return FLOEBERG_INVALID_INPUT;
  case ErrorKind::OutOfScope: return FLOEBERG_OUT_OF_SCOPE;
  case ErrorKind::Numeric: return FLOEBERG_NUMERIC;
  case ErrorKind::Parse: return FLOEBERG_PARSE;
  case ErrorKind::Io: return FLOEBERG_IO;
  case ErrorKind::MissingInput: return FLOEBERG_MISSING_INPUT;
  case ErrorKind::NoReference: return FLOEBERG_NO_REFERENCE;
  case ErrorKind::Consistency: return FLOEBERG_CONSISTENCY;
  case ErrorKind::ArchitectureMismatch: return FLOEBERG_ARCHITECTURE_MISMATCH;
  case ErrorKind::Internal: return FLOEBERG_INTERNAL;
  }
  return FLOEBERG_INTERNAL;
}

// Runs `fn`, translating exceptions into a status and the thread's message.
template <class Fn> floeberg_status guarded(Fn &&fn) noexcept {
  try {
    fn();
    last_error.clear();
    return FLOEBERG_OK;
  } catch (const Error &e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc &) {
    last_error = "out of memory";
    return FLOEBERG_INTERNAL;
  } catch (const std::exception &e) {
    last_error = e.what();
    return FLOEBERG_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return FLOEBERG_INTERNAL;
  }
}

void need(const void *p, const char *name) {
  require(p != nullptr, ErrorKind::InvalidInput, std::string(name) + " is null");
}

const std::string &command_list() {
  static const std::string names = [] {
    std::string s;
    for (auto n : pipeline::command_names()) {
      s += n;
      s += '\0';
    }
    s += '\0';
    return s;
  }();
  return names;
}

} // namespace

extern "C" {

const char *floeberg_last_error(void) { return last_error.c_str(); }

const char *floeberg_status_name(floeberg_status s) {
  switch (s) {
  case FLOEBERG_OK: return "ok";
  case FLOEBERG_INVALID_INPUT: return "invalid_input";
  case FLOEBERG_OUT_OF_SCOPE: return "out_of_scope";
  case FLOEBERG_NUMERIC: return "numeric";
  case FLOEBERG_PARSE: return "parse";
  case FLOEBERG_IO: return "io";
  case FLOEBERG_MISSING_INPUT: return "missing_input";
  case FLOEBERG_NO_REFERENCE: return "no_reference";
  case FLOEBERG_CONSISTENCY: return "consistency";
  case FLOEBERG_ARCHITECTURE_MISMATCH: return "architecture_mismatch";
  case FLOEBERG_INTERNAL: return "internal";
  }
  return "unknown";
}

int floeberg_exit_code(floeberg_status s) {
  switch (s) {
  case FLOEBERG_OK: return 0;
  case FLOEBERG_MISSING_INPUT: return 2;
  case FLOEBERG_INVALID_INPUT:
  case FLOEBERG_OUT_OF_SCOPE:
  case FLOEBERG_PARSE:
  case FLOEBERG_NO_REFERENCE:
  case FLOEBERG_CONSISTENCY:
  case FLOEBERG_ARCHITECTURE_MISMATCH: return 3;
  default: return 1;
  }
}

const char *floeberg_version(void) { return "0.1.0"; }

floeberg_status floeberg_context_new(floeberg_context **out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = new floeberg_context();
  });
}

void floeberg_context_free(floeberg_context *ctx) { delete ctx; }

floeberg_status floeberg_context_load_config(floeberg_context *ctx, const char *path) {
  return guarded([&] {
    need(ctx, "context");
    need(path, "path");
    const auto loaded = pipeline::PipelineConfig::load(path);
    // Re-apply only the explicitly assigned keys so earlier settings survive.
    for (const auto &k : pipeline::config_keys())
      if (loaded.is_set(k.key))
        ctx->config.set(k.key, loaded.text(k.key));
  });
}

floeberg_status floeberg_context_set(floeberg_context *ctx, const char *key,
                                     const char *value) {
  return guarded([&] {
    need(ctx, "context");
    need(key, "key");
    need(value, "value");
    ctx->config.set(key, value);
  });
}

floeberg_status floeberg_context_run(floeberg_context *ctx, const char *command) {
  return guarded([&] {
    need(ctx, "context");
    need(command, "command");
    ctx->log.clear();
    ctx->products.clear();
    auto r = pipeline::run_command(command, ctx->config);
    ctx->log = std::move(r.log);
    for (const auto &p : r.products)
      ctx->products.push_back(p.string());
  });
}

const char *floeberg_context_log(const floeberg_context *ctx) {
  return ctx ? ctx->log.c_str() : "";
}

size_t floeberg_context_product_count(const floeberg_context *ctx) {
  return ctx ? ctx->products.size() : 0;
}

const char *floeberg_context_product(const floeberg_context *ctx, size_t i) {
  if (!ctx || i >= ctx->products.size())
    return nullptr;
  return ctx->products[i].c_str();
}

const char *floeberg_command_names(void) { return command_list().c_str(); }

size_t floeberg_config_key_count(void) { return pipeline::config_keys().size(); }

const char *floeberg_config_key_name(size_t i) {
  const auto &k = pipeline::config_keys();
  return i < k.size() ? k[i].key.data() : nullptr;
}

const char *floeberg_config_key_default(size_t i) {
  const auto &k = pipeline::config_keys();
  return i < k.size() ? k[i].default_value.data() : nullptr;
}

const char *floeberg_config_key_help(size_t i) {
  const auto &k = pipeline::config_keys();
  return i < k.size() ? k[i].help.data() : nullptr;
}

floeberg_status floeberg_project(double lat, double lon, double *x, double *y) {
  return guarded([&] {
    need(x, "x");
    need(y, "y");
    static const geo::SouthPolarStereographic proj(geo::StereoParams::epsg3976());
    const auto q = proj.forward({lat, lon});
    *x = q.x;
    *y = q.y;
  });
}

floeberg_status floeberg_unproject(double x, double y, double *lat, double *lon) {
  return guarded([&] {
    need(lat, "lat");
    need(lon, "lon");
    static const geo::SouthPolarStereographic proj(geo::StereoParams::epsg3976());
    const auto p = proj.inverse({x, y});
    *lat = p.lat;
    *lon = p.lon;
  });
}

floeberg_status floeberg_parse_shift(const char *text, double *dx, double *dy) {
  return guarded([&] {
    need(text, "text");
    need(dx, "dx");
    need(dy, "dy");
    const auto s = geo::parse_shift(text);
    *dx = s.dx;
    *dy = s.dy;
  });
}

floeberg_status floeberg_lead_height(const double *h, const double *sigma_sq, size_t n,
                                     double *h_lead, double *sigma_sq_lead) {
  return guarded([&] {
    need(h_lead, "h_lead");
    need(sigma_sq_lead, "sigma_sq_lead");
    require(n == 0 || (h && sigma_sq), ErrorKind::InvalidInput, "null sample arrays");
    std::vector<surface::LeadSample> s(n);
    for (size_t i = 0; i < n; ++i)
      s[i] = {h[i], sigma_sq[i]};
    const auto e = surface::lead_height(s);
    *h_lead = e.h;
    *sigma_sq_lead = e.sigma_sq;
  });
}

floeberg_status floeberg_window_reference(const double *h, const double *sigma_sq,
                                          size_t n, double *h_ref,
                                          double *sigma_sq_ref) {
  return guarded([&] {
    need(h_ref, "h_ref");
    need(sigma_sq_ref, "sigma_sq_ref");
    require(n == 0 || (h && sigma_sq), ErrorKind::InvalidInput, "null lead arrays");
    std::vector<surface::Lead> leads(n);
    for (size_t i = 0; i < n; ++i) {
      leads[i].h_lead = h[i];
      leads[i].sigma_sq_lead = sigma_sq[i];
      leads[i].h_min = h[i];
      leads[i].samples = {{h[i], sigma_sq[i]}};
    }
    const auto e = surface::window_reference(leads, surface::Method::NasaWeighted);
    *h_ref = e.h;
    *sigma_sq_ref = e.sigma_sq;
  });
}

floeberg_status floeberg_model_load(const char *path, floeberg_model **out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto m = std::make_unique<floeberg_model>();
    m->model = nnet::load_model(path);
    *out = m.release();
  });
}

void floeberg_model_free(floeberg_model *model) { delete model; }

int floeberg_model_architecture(const floeberg_model *model) {
  return model ? static_cast<int>(model->model.architecture()) : 0;
}

size_t floeberg_model_sequence_length(const floeberg_model *) {
  return nnet::kSequenceLength;
}

size_t floeberg_model_feature_count(void) { return ingest::kFeatureCount; }

floeberg_status floeberg_model_predict(const floeberg_model *model, const double *windows,
                                       size_t n, double *probs, uint8_t *classes) {
  return guarded([&] {
    need(model, "model");
    require(n == 0 || windows, ErrorKind::InvalidInput, "windows is null");
    std::vector<nnet::Window> batch(n);
    const double *p = windows;
    for (auto &w : batch)
      for (auto &row : w)
        for (auto &v : row)
          v = *p++;
    const auto out = nnet::forward(model->model, batch);
    for (size_t i = 0; i < n; ++i) {
      if (probs)
        for (int c = 0; c < kClassCount; ++c)
          probs[i * kClassCount + c] = out[i][c];
      if (classes)
        classes[i] = class_code(class_from_index(nnet::argmax(out[i])));
    }
  });
}

} // extern "C"
