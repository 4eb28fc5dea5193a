#include "domino/domino.h"

#include <cstring>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "domino/config.hpp"
#include "domino/dom1.hpp"
#include "domino/model.hpp"
#include "domino/penalty.hpp"
#include "domino/phantom.hpp"
#include "domino/report.hpp"
#include "domino/workflow.hpp"

struct domino_config {
  domino::RunConfig cfg;
};

struct domino_dataset {
  std::vector<domino::PhantomSample> samples;
};

struct domino_matrix {
  domino::DenseMatrix m;
};

struct domino_model {
  domino::PatchClassifier m;
};

struct domino_run {
  domino_model model;
  std::optional<domino_model> base;
  std::optional<domino_matrix> penalty;
  std::optional<domino_matrix> confusion;
  std::vector<domino::TracePoint> trace;
  std::vector<std::string> warnings;
};

struct domino_report {
  domino::EvalReport r;
};

namespace {

thread_local std::string g_last_error;

domino_status status_of(domino::ErrorKind kind) {
  using domino::ErrorKind;
  switch (kind) {
    case ErrorKind::Index: return DOMINO_ERR_INDEX;
    case ErrorKind::Shape: return DOMINO_ERR_SHAPE;
    case ErrorKind::Argument: return DOMINO_ERR_ARGUMENT;
    case ErrorKind::Parse: return DOMINO_ERR_PARSE;
    case ErrorKind::Validation: return DOMINO_ERR_VALIDATION;
    case ErrorKind::Numeric: return DOMINO_ERR_NUMERIC;
    case ErrorKind::Config: return DOMINO_ERR_CONFIG;
    case ErrorKind::Dataset: return DOMINO_ERR_DATASET;
    case ErrorKind::Unsupported: return DOMINO_ERR_UNSUPPORTED;
    case ErrorKind::Training: return DOMINO_ERR_TRAINING;
    case ErrorKind::Io: return DOMINO_ERR_IO;
  }
  return DOMINO_ERR_INTERNAL;
}

template <typename F>
domino_status guarded(F&& body) noexcept {
  g_last_error.clear();
  try {
    body();
    return DOMINO_OK;
  } catch (const domino::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return DOMINO_ERR_INTERNAL;
}

template <typename T>
void require(const T* p, const char* what) {
  if (p == nullptr) domino::fail(domino::ErrorKind::Argument, std::string(what) + " is NULL");
}

const domino::PhantomSample& sample_at(const domino_dataset* ds, size_t index) {
  require(ds, "dataset");
  if (index >= ds->samples.size()) {
    domino::fail(domino::ErrorKind::Index, "sample index " + std::to_string(index) +
                                               " out of range");
  }
  return ds->samples[index];
}

const domino::GranularityReport& granularity(const domino_report* report, int merged) {
  require(report, "report");
  if (merged) {
    if (!report->r.merged) domino::fail(domino::ErrorKind::Argument, "report has no merged section");
    return *report->r.merged;
  }
  return report->r.fine;
}

}  // namespace

extern "C" {

const char* domino_version(void) { return "1.0.0"; }

const char* domino_status_string(domino_status status) {
  switch (status) {
    case DOMINO_OK: return "ok";
    case DOMINO_ERR_INDEX: return "index error";
    case DOMINO_ERR_SHAPE: return "shape error";
    case DOMINO_ERR_ARGUMENT: return "argument error";
    case DOMINO_ERR_PARSE: return "parse error";
    case DOMINO_ERR_VALIDATION: return "validation error";
    case DOMINO_ERR_NUMERIC: return "numeric error";
    case DOMINO_ERR_CONFIG: return "config error";
    case DOMINO_ERR_DATASET: return "dataset error";
    case DOMINO_ERR_UNSUPPORTED: return "unsupported";
    case DOMINO_ERR_TRAINING: return "training error";
    case DOMINO_ERR_IO: return "io error";
    case DOMINO_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* domino_last_error(void) { return g_last_error.c_str(); }

// ---- configuration ----

domino_status domino_config_default(domino_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new domino_config{domino::default_head_config()};
  });
}

domino_status domino_config_load(const char* path, domino_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new domino_config{domino::load_run_config(path)};
  });
}

domino_status domino_config_parse(const char* json_text, domino_config** out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    *out = new domino_config{domino::parse_run_config(json_text)};
  });
}

void domino_config_free(domino_config* cfg) { delete cfg; }

domino_status domino_config_set_seed(domino_config* cfg, uint64_t seed) {
  return guarded([&] {
    require(cfg, "config");
    cfg->cfg.phantom.seed = seed;
    cfg->cfg.train.seed = seed;
  });
}

domino_status domino_config_set_beta(domino_config* cfg, double beta) {
  return guarded([&] {
    require(cfg, "config");
    if (!(beta >= 0.0 && beta <= 1.0)) {
      domino::fail(domino::ErrorKind::Config, "beta must lie in [0, 1]");
    }
    cfg->cfg.train.loss.beta = beta;
  });
}

domino_status domino_config_set_scale(domino_config* cfg, double scale) {
  return guarded([&] {
    require(cfg, "config");
    if (!(scale > 0.0)) domino::fail(domino::ErrorKind::Config, "scale must be positive");
    cfg->cfg.train.scale = scale;
  });
}

domino_status domino_config_set_iterations(domino_config* cfg, uint64_t iterations) {
  return guarded([&] {
    require(cfg, "config");
    if (iterations == 0) domino::fail(domino::ErrorKind::Config, "iterations must be positive");
    cfg->cfg.train.iterations = iterations;
  });
}

size_t domino_config_num_classes(const domino_config* cfg) {
  return cfg ? cfg->cfg.classes.size() : 0;
}

const char* domino_config_class_name(const domino_config* cfg, size_t index) {
  if (cfg == nullptr || index >= cfg->cfg.classes.size()) return nullptr;
  return cfg->cfg.classes.name(index).c_str();
}

int domino_config_has_hierarchy(const domino_config* cfg) {
  return cfg && cfg->cfg.hierarchy ? 1 : 0;
}

int domino_config_has_group_map(const domino_config* cfg) {
  return cfg && cfg->cfg.group_map ? 1 : 0;
}

domino_status domino_config_to_json(const domino_config* cfg, char* buf, size_t cap,
                                    size_t* needed) {
  return guarded([&] {
    require(cfg, "config");
    const std::string text = domino::run_config_json(cfg->cfg);
    if (needed) *needed = text.size() + 1;
    if (buf == nullptr) return;
    if (cap < text.size() + 1) domino::fail(domino::ErrorKind::Argument, "buffer too small");
    std::memcpy(buf, text.c_str(), text.size() + 1);
  });
}

// ---- datasets ----

domino_status domino_phantom_generate(const domino_config* cfg, uint64_t first_index, size_t count,
                                      domino_dataset** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    *out = new domino_dataset{domino::generate_set(cfg->cfg.phantom, first_index, count)};
  });
}

domino_status domino_dataset_load(const domino_config* cfg, const char* dir, domino_dataset** out) {
  return guarded([&] {
    require(cfg, "config");
    require(dir, "dir");
    require(out, "out");
    *out = new domino_dataset{domino::load_dataset(dir, cfg->cfg.classes.size())};
  });
}

domino_status domino_dataset_save(const domino_dataset* ds, const char* dir) {
  return guarded([&] {
    require(ds, "dataset");
    require(dir, "dir");
    domino::save_dataset(dir, ds->samples);
  });
}

size_t domino_dataset_size(const domino_dataset* ds) { return ds ? ds->samples.size() : 0; }

domino_status domino_dataset_dims(const domino_dataset* ds, size_t index, int* width, int* height) {
  return guarded([&] {
    const auto& s = sample_at(ds, index);
    if (width) *width = s.image.width();
    if (height) *height = s.image.height();
  });
}

domino_status domino_dataset_image(const domino_dataset* ds, size_t index, double* out,
                                   size_t cap) {
  return guarded([&] {
    const auto& s = sample_at(ds, index);
    require(out, "out");
    const auto data = s.image.data();
    if (cap < data.size()) domino::fail(domino::ErrorKind::Argument, "buffer too small");
    std::copy(data.begin(), data.end(), out);
  });
}

domino_status domino_dataset_truth(const domino_dataset* ds, size_t index, uint8_t* out,
                                   size_t cap) {
  return guarded([&] {
    const auto& s = sample_at(ds, index);
    require(out, "out");
    const auto data = s.truth.data();
    if (cap < data.size()) domino::fail(domino::ErrorKind::Argument, "buffer too small");
    std::copy(data.begin(), data.end(), out);
  });
}

void domino_dataset_free(domino_dataset* ds) { delete ds; }

// ---- matrices ----

domino_status domino_matrix_create(size_t rows, size_t cols, const double* data,
                                   domino_matrix** out) {
  return guarded([&] {
    require(data, "data");
    require(out, "out");
    *out = new domino_matrix{domino::DenseMatrix(rows, cols, std::vector<double>(data, data + rows * cols))};
  });
}

domino_status domino_matrix_load(const char* path, domino_matrix** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    const std::filesystem::path p(path);
    *out = new domino_matrix{p.extension() == ".csv" ? domino::csv::load_matrix(p)
                                                     : domino::dom1::to_matrix(domino::dom1::load(p))};
  });
}

domino_status domino_matrix_save(const domino_matrix* m, const char* path) {
  return guarded([&] {
    require(m, "matrix");
    require(path, "path");
    const std::filesystem::path p(path);
    if (p.extension() == ".csv") {
      domino::csv::save_matrix(p, m->m);
    } else {
      domino::dom1::save(p, domino::dom1::to_tensor(m->m));
    }
  });
}

size_t domino_matrix_rows(const domino_matrix* m) { return m ? m->m.rows() : 0; }
size_t domino_matrix_cols(const domino_matrix* m) { return m ? m->m.cols() : 0; }
const double* domino_matrix_data(const domino_matrix* m) { return m ? m->m.data().data() : nullptr; }
void domino_matrix_free(domino_matrix* m) { delete m; }

domino_status domino_penalty_from_confusion(const domino_matrix* counts, double scale,
                                            domino_matrix** out) {
  return guarded([&] {
    require(counts, "counts");
    require(out, "out");
    const auto c = domino::ConfusionMatrix::from_counts(counts->m);
    *out = new domino_matrix{domino::build_cm_penalty(c, scale).matrix()};
  });
}

domino_status domino_penalty_from_hierarchy(const domino_config* cfg, domino_matrix** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    if (!cfg->cfg.hierarchy) domino::fail(domino::ErrorKind::Config, "config has no hierarchy");
    const auto& h = *cfg->cfg.hierarchy;
    *out = new domino_matrix{
        domino::build_hc_penalty(h.spec, h.max_penalty, h.within_penalty).matrix()};
  });
}

domino_status domino_penalty_validate(const domino_matrix* w) {
  return guarded([&] {
    require(w, "matrix");
    (void)domino::PenaltyMatrix::from_matrix(w->m);
  });
}

// ---- training ----

domino_status domino_train(const domino_config* cfg, domino_mode mode, const domino_dataset* train,
                           const domino_dataset* heldout, domino_run** out) {
  return guarded([&] {
    require(cfg, "config");
    require(train, "train dataset");
    require(out, "out");
    const auto& rc = cfg->cfg;
    const std::size_t n = rc.classes.size();
    auto run = std::make_unique<domino_run>();
    switch (mode) {
      case DOMINO_MODE_BASE: {
        auto result = domino::train(train->samples, n, rc.train);
        run->model.m = std::move(result.model);
        run->trace = std::move(result.trace);
        break;
      }
      case DOMINO_MODE_CM: {
        if (heldout == nullptr) {
          domino::fail(domino::ErrorKind::Argument, "cm mode requires a held-out dataset");
        }
        auto result = domino::train_cm(train->samples, heldout->samples, n, rc.train);
        run->model.m = std::move(result.regularized.model);
        run->trace = std::move(result.regularized.trace);
        run->base = domino_model{std::move(result.base.model)};
        run->penalty = domino_matrix{result.penalty.matrix()};
        run->confusion = domino_matrix{result.confusion.counts};
        run->warnings = std::move(result.warnings);
        break;
      }
      case DOMINO_MODE_HC: {
        if (!rc.hierarchy) domino::fail(domino::ErrorKind::Config, "hc mode requires a hierarchy");
        const auto w = domino::build_hc_penalty(rc.hierarchy->spec, rc.hierarchy->max_penalty,
                                                rc.hierarchy->within_penalty);
        auto result = domino::train(train->samples, n, rc.train, &w);
        run->model.m = std::move(result.model);
        run->trace = std::move(result.trace);
        run->penalty = domino_matrix{w.matrix()};
        break;
      }
      default:
        domino::fail(domino::ErrorKind::Argument, "unknown training mode");
    }
    *out = run.release();
  });
}

const domino_model* domino_run_model(const domino_run* run) { return run ? &run->model : nullptr; }

const domino_model* domino_run_base_model(const domino_run* run) {
  return run && run->base ? &*run->base : nullptr;
}

const domino_matrix* domino_run_penalty(const domino_run* run) {
  return run && run->penalty ? &*run->penalty : nullptr;
}

const domino_matrix* domino_run_confusion(const domino_run* run) {
  return run && run->confusion ? &*run->confusion : nullptr;
}

domino_status domino_run_write_trace(const domino_run* run, const char* path) {
  return guarded([&] {
    require(run, "run");
    require(path, "path");
    domino::write_file_atomic(path, domino::trace_csv(run->trace));
  });
}

size_t domino_run_warning_count(const domino_run* run) { return run ? run->warnings.size() : 0; }

const char* domino_run_warning(const domino_run* run, size_t index) {
  if (run == nullptr || index >= run->warnings.size()) return nullptr;
  return run->warnings[index].c_str();
}

void domino_run_free(domino_run* run) { delete run; }

// ---- models ----

domino_status domino_model_load(const char* path, domino_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new domino_model{domino::load_model(path)};
  });
}

domino_status domino_model_save(const domino_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    domino::save_model(path, model->m);
  });
}

size_t domino_model_num_classes(const domino_model* model) {
  return model ? model->m.shape.num_classes : 0;
}

domino_status domino_model_predict(const domino_model* model, const domino_dataset* ds, size_t index,
                                   double* out, size_t cap) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const auto p = domino::predict(model->m, sample_at(ds, index).image);
    if (cap < p.data().size()) domino::fail(domino::ErrorKind::Argument, "buffer too small");
    std::copy(p.data().begin(), p.data().end(), out);
  });
}

void domino_model_free(domino_model* model) { delete model; }

// ---- evaluation ----

domino_status domino_evaluate(const domino_model* model, const domino_dataset* ds,
                              const domino_config* cfg, int merged, domino_report** out) {
  return guarded([&] {
    require(model, "model");
    require(ds, "dataset");
    require(cfg, "config");
    require(out, "out");
    const auto& rc = cfg->cfg;
    if (merged && !rc.group_map) domino::fail(domino::ErrorKind::Config, "config has no group_map");
    if (ds->samples.empty()) domino::fail(domino::ErrorKind::Dataset, "dataset is empty");
    *out = new domino_report{domino::evaluate_model(
        model->m, ds->samples, rc.classes, merged ? &*rc.group_map : nullptr, rc.eval)};
  });
}

domino_status domino_report_write(const domino_report* report, const char* dir) {
  return guarded([&] {
    require(report, "report");
    require(dir, "dir");
    domino::write_report(dir, report->r);
  });
}

domino_status domino_report_top_n(const domino_report* report, int merged, size_t n, double* out) {
  return guarded([&] {
    require(out, "out");
    const auto& g = granularity(report, merged);
    if (n < 1 || n > g.top_n.size()) domino::fail(domino::ErrorKind::Argument, "n out of range");
    *out = g.top_n[n - 1];
  });
}

domino_status domino_report_mean_ece(const domino_report* report, int merged, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = granularity(report, merged).mean_ece;
  });
}

size_t domino_report_num_classes(const domino_report* report, int merged) {
  if (report == nullptr) return 0;
  if (merged) return report->r.merged ? report->r.merged->classes.size() : 0;
  return report->r.fine.classes.size();
}

size_t domino_report_warning_count(const domino_report* report) {
  return report ? report->r.warnings.size() : 0;
}

const char* domino_report_warning(const domino_report* report, size_t index) {
  if (report == nullptr || index >= report->r.warnings.size()) return nullptr;
  return report->r.warnings[index].c_str();
}

void domino_report_free(domino_report* report) { delete report; }

domino_status domino_render_reliability(const char* in_dir, const char* out_dir, size_t* written) {
  return guarded([&] {
    require(in_dir, "in_dir");
    require(out_dir, "out_dir");
    const auto files = domino::render_reliability_dir(in_dir, out_dir);
    if (written) *written = files.size();
  });
}

}  // extern "C"
