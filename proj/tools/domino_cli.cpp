// Command-line front end over the domino C API.
//
//   domino phantom --config head11.json --count 20 --out data/train
//   domino train   --mode cm --data data/train --heldout data/heldout --out run/
//   domino eval    --model run/model.dom --data data/test --out eval/ --merged
//   domino penalty --from-confusion run/confusion.csv --out w/
//   domino report  --in eval/ --out plots/
//
// Exit codes: 0 success, 2 usage/config/input error, 3 numeric or training failure.

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "domino/domino.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct Failure {
  domino_status status;
  std::string context;
};

int exit_code_for(domino_status status) {
  switch (status) {
    case DOMINO_OK: return kExitOk;
    case DOMINO_ERR_NUMERIC:
    case DOMINO_ERR_TRAINING:
    case DOMINO_ERR_INTERNAL: return kExitRuntime;
    default: return kExitUsage;
  }
}

void check(domino_status status, const std::string& context) {
  if (status != DOMINO_OK) throw Failure{status, context + ": " + domino_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using ConfigPtr = std::unique_ptr<domino_config, Deleter<domino_config, domino_config_free>>;
using DatasetPtr = std::unique_ptr<domino_dataset, Deleter<domino_dataset, domino_dataset_free>>;
using MatrixPtr = std::unique_ptr<domino_matrix, Deleter<domino_matrix, domino_matrix_free>>;
using ModelPtr = std::unique_ptr<domino_model, Deleter<domino_model, domino_model_free>>;
using RunPtr = std::unique_ptr<domino_run, Deleter<domino_run, domino_run_free>>;
using ReportPtr = std::unique_ptr<domino_report, Deleter<domino_report, domino_report_free>>;

struct Overrides {
  std::string config;
  std::optional<uint64_t> seed;
  std::optional<double> beta;
  std::optional<double> scale;
  std::optional<uint64_t> iterations;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration (default: built-in head phantom)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "seed for phantom generation and training");
}

void add_training(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--beta", o.beta, "penalty weight in [0, 1]");
  cmd->add_option("--scale", o.scale, "confusion penalty scale S");
  cmd->add_option("--iterations", o.iterations, "training iterations");
}

ConfigPtr load_config(const Overrides& o) {
  domino_config* raw = nullptr;
  if (o.config.empty()) {
    check(domino_config_default(&raw), "default config");
  } else {
    check(domino_config_load(o.config.c_str(), &raw), "config " + o.config);
  }
  ConfigPtr cfg(raw);
  if (o.seed) check(domino_config_set_seed(cfg.get(), *o.seed), "--seed");
  if (o.beta) check(domino_config_set_beta(cfg.get(), *o.beta), "--beta");
  if (o.scale) check(domino_config_set_scale(cfg.get(), *o.scale), "--scale");
  if (o.iterations) check(domino_config_set_iterations(cfg.get(), *o.iterations), "--iterations");
  return cfg;
}

DatasetPtr load_dataset(const domino_config* cfg, const std::string& dir) {
  domino_dataset* raw = nullptr;
  check(domino_dataset_load(cfg, dir.c_str(), &raw), "dataset " + dir);
  return DatasetPtr(raw);
}

void save_matrix(const domino_matrix* m, const fs::path& path) {
  check(domino_matrix_save(m, path.string().c_str()), path.string());
}

std::string out_path(const fs::path& dir, const char* name) { return (dir / name).string(); }

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{DOMINO_ERR_IO, "cannot create " + dir.string() + ": " + ec.message()};
}

void print_warnings(size_t count, const char* (*get)(const void*, size_t), const void* owner) {
  for (size_t i = 0; i < count; ++i) std::fprintf(stderr, "warning: %s\n", get(owner, i));
}

int cmd_phantom(const Overrides& o, size_t count, uint64_t first, const std::string& out) {
  auto cfg = load_config(o);
  domino_dataset* raw = nullptr;
  check(domino_phantom_generate(cfg.get(), first, count, &raw), "phantom");
  DatasetPtr ds(raw);
  check(domino_dataset_save(ds.get(), out.c_str()), "save dataset " + out);
  std::printf("wrote %zu samples to %s\n", count, out.c_str());
  return kExitOk;
}

int cmd_train(const Overrides& o, const std::string& mode_name, const std::string& data,
              const std::string& heldout, const std::string& out) {
  domino_mode mode = DOMINO_MODE_BASE;
  if (mode_name == "cm") mode = DOMINO_MODE_CM;
  if (mode_name == "hc") mode = DOMINO_MODE_HC;
  if (mode == DOMINO_MODE_CM && heldout.empty()) {
    throw Failure{DOMINO_ERR_ARGUMENT, "--mode cm requires --heldout"};
  }
  auto cfg = load_config(o);
  if (mode == DOMINO_MODE_HC && !domino_config_has_hierarchy(cfg.get())) {
    throw Failure{DOMINO_ERR_CONFIG, "--mode hc requires a hierarchy in the config"};
  }
  auto train = load_dataset(cfg.get(), data);
  DatasetPtr held;
  if (mode == DOMINO_MODE_CM) held = load_dataset(cfg.get(), heldout);

  domino_run* raw = nullptr;
  check(domino_train(cfg.get(), mode, train.get(), held.get(), &raw), "train");
  RunPtr run(raw);
  print_warnings(
      domino_run_warning_count(run.get()),
      [](const void* r, size_t i) { return domino_run_warning(static_cast<const domino_run*>(r), i); },
      run.get());

  const fs::path dir(out);
  make_dir(dir);
  check(domino_model_save(domino_run_model(run.get()), out_path(dir, "model.dom").c_str()),
        "save model");
  check(domino_run_write_trace(run.get(), out_path(dir, "trace.csv").c_str()), "save trace");
  if (const auto* base = domino_run_base_model(run.get())) {
    check(domino_model_save(base, out_path(dir, "base_model.dom").c_str()), "save base model");
  }
  if (const auto* c = domino_run_confusion(run.get())) save_matrix(c, dir / "confusion.csv");
  if (const auto* w = domino_run_penalty(run.get())) save_matrix(w, dir / "penalty.csv");
  std::printf("trained %s model -> %s\n", mode_name.c_str(), out.c_str());
  return kExitOk;
}

int cmd_eval(const Overrides& o, const std::string& model_path, const std::string& data,
             const std::string& out, bool merged) {
  auto cfg = load_config(o);
  domino_model* raw_model = nullptr;
  check(domino_model_load(model_path.c_str(), &raw_model), "model " + model_path);
  ModelPtr model(raw_model);
  auto ds = load_dataset(cfg.get(), data);

  domino_report* raw_report = nullptr;
  check(domino_evaluate(model.get(), ds.get(), cfg.get(), merged ? 1 : 0, &raw_report), "eval");
  ReportPtr report(raw_report);
  print_warnings(
      domino_report_warning_count(report.get()),
      [](const void* r, size_t i) {
        return domino_report_warning(static_cast<const domino_report*>(r), i);
      },
      report.get());
  check(domino_report_write(report.get(), out.c_str()), "write report " + out);

  for (int g = 0; g <= (merged ? 1 : 0); ++g) {
    double top1 = 0.0, ece = 0.0;
    check(domino_report_top_n(report.get(), g, 1, &top1), "top-1");
    check(domino_report_mean_ece(report.get(), g, &ece), "ece");
    std::printf("%s (%zu classes): top1=%.4f mean_ece=%.4f\n", g ? "merged" : "fine",
                domino_report_num_classes(report.get(), g), top1, ece);
  }
  return kExitOk;
}

int cmd_penalty(const Overrides& o, const std::string& confusion, bool hierarchy,
                const std::string& out) {
  auto cfg = load_config(o);
  domino_matrix* raw = nullptr;
  if (!confusion.empty()) {
    domino_matrix* counts_raw = nullptr;
    check(domino_matrix_load(confusion.c_str(), &counts_raw), "confusion " + confusion);
    MatrixPtr counts(counts_raw);
    double scale = 3.0;
    if (o.scale) scale = *o.scale;
    check(domino_penalty_from_confusion(counts.get(), scale, &raw), "cm penalty");
  } else if (hierarchy) {
    check(domino_penalty_from_hierarchy(cfg.get(), &raw), "hc penalty");
  }
  MatrixPtr w(raw);
  const fs::path dir(out);
  make_dir(dir);
  save_matrix(w.get(), dir / "penalty.csv");
  save_matrix(w.get(), dir / "penalty.dom");
  std::printf("wrote %zux%zu penalty to %s\n", domino_matrix_rows(w.get()),
              domino_matrix_cols(w.get()), out.c_str());
  return kExitOk;
}

int cmd_report(const std::string& in, const std::string& out) {
  size_t written = 0;
  check(domino_render_reliability(in.c_str(), out.c_str(), &written), "report");
  std::printf("rendered %zu reliability plots to %s\n", written, out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"domino: penalty-regularized calibration for multi-class segmentation"};
  app.require_subcommand(1);

  Overrides o;
  size_t count = 0;
  uint64_t first_index = 0;
  std::string out, data, heldout, model, mode = "base", confusion, in;
  bool merged = false, hierarchy = false;

  auto* phantom = app.add_subcommand("phantom", "generate a synthetic phantom dataset");
  add_common(phantom, o);
  phantom->add_option("--count", count, "number of samples")->required();
  phantom->add_option("--first-index", first_index, "index of the first sample");
  phantom->add_option("--out", out, "output directory")->required();

  auto* train = app.add_subcommand("train", "train a base, cm or hc model");
  add_common(train, o);
  add_training(train, o);
  train->add_option("--mode", mode, "regularization mode")
      ->check(CLI::IsMember({"base", "cm", "hc"}));
  train->add_option("--data", data, "training dataset directory")->required();
  train->add_option("--heldout", heldout, "held-out dataset directory (cm mode)");
  train->add_option("--out", out, "output directory")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a model on a dataset");
  add_common(eval, o);
  eval->add_option("--model", model, "model file")->required();
  eval->add_option("--data", data, "dataset directory")->required();
  eval->add_option("--out", out, "report directory")->required();
  eval->add_flag("--merged", merged, "also report under the config group map");

  auto* penalty = app.add_subcommand("penalty", "build a penalty matrix");
  add_common(penalty, o);
  penalty->add_option("--scale", o.scale, "confusion penalty scale S");
  auto* from_cm = penalty->add_option("--from-confusion", confusion, "confusion counts CSV");
  auto* from_hc = penalty->add_flag("--hierarchy", hierarchy, "use the config hierarchy");
  from_cm->excludes(from_hc);
  penalty->add_option("--out", out, "output directory")->required();

  auto* report = app.add_subcommand("report", "re-render reliability CSVs as SVG");
  report->add_option("--in", in, "directory with reliability_*.csv")->required();
  report->add_option("--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*phantom) return cmd_phantom(o, count, first_index, out);
    if (*train) return cmd_train(o, mode, data, heldout, out);
    if (*eval) return cmd_eval(o, model, data, out, merged);
    if (*penalty) {
      if (confusion.empty() && !hierarchy) {
        throw Failure{DOMINO_ERR_ARGUMENT, "penalty needs --from-confusion or --hierarchy"};
      }
      return cmd_penalty(o, confusion, hierarchy, out);
    }
    if (*report) return cmd_report(in, out);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.context.c_str());
    return exit_code_for(f.status);
  }
  return kExitUsage;
}
