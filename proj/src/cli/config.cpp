#include "engage_mil/cli/config.hpp"

#include <fstream>
#include <initializer_list>

#include "engage_mil/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace engage::cli {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kSvr: return "svr";
    case ModelKind::kSgd: return "sgd";
    case ModelKind::kRidge: return "ridge";
    case ModelKind::kMilNet: return "milnet";
    case ModelKind::kSeqNet: return "seqnet";
  }
  return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  for (ModelKind k : {ModelKind::kSvr, ModelKind::kSgd, ModelKind::kRidge, ModelKind::kMilNet,
                      ModelKind::kSeqNet})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> known) {
  require(j.is_object(), ErrorCode::kInvalidArgument, where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    require(ok, ErrorCode::kInvalidArgument, where + ": unknown key '" + key + "'");
  }
}

template <class T>
void get(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kInvalidArgument, where + "." + key + ": wrong type");
  }
}

void get_path(const json& j, const char* key, fs::path& out, const fs::path& base,
              const std::string& where) {
  std::string s;
  get(j, key, s, where);
  if (s.empty()) return;
  const fs::path p(s);
  out = p.is_absolute() || base.empty() ? p : base / p;
}

template <class E, class Parse>
void get_enum(const json& j, const char* key, E& out, Parse parse, const std::string& where) {
  std::string s;
  get(j, key, s, where);
  if (s.empty()) return;
  const auto v = parse(s);
  require(v.has_value(), ErrorCode::kInvalidArgument,
          where + "." + key + ": unknown value '" + s + "'");
  out = *v;
}

deepmil::Pooling parse_pooling(const json& j, deepmil::Pooling p, const std::string& where) {
  std::string kind;
  get(j, "pooling", kind, where);
  if (kind == "topk") p.kind = deepmil::PoolingKind::kTopK;
  else if (kind == "mean") p.kind = deepmil::PoolingKind::kMean;
  else require(kind.empty(), ErrorCode::kInvalidArgument, where + ".pooling: expected topk or mean");
  get(j, "k", p.k, where);
  return p;
}

}  // namespace

RunConfig parse_config(const json& doc, const fs::path& base) {
  RunConfig c;
  check_keys(doc, "config",
             {"seed", "jobs", "model", "out", "features", "extract", "synth", "train", "predict",
              "localize", "eval"});
  get(doc, "seed", c.seed, "config");
  get(doc, "jobs", c.jobs, "config");
  get_path(doc, "model", c.model, base, "config");
  get_path(doc, "out", c.out, base, "config");

  if (doc.contains("features")) {
    const json& f = doc["features"];
    const std::string w = "features";
    check_keys(f, w, {"kind", "window", "stride", "target_fps", "M", "lbp_grid", "xy_all_frames"});
    get_enum(f, "kind", c.features.kind, features::parse_feature_kind, w);
    get(f, "window", c.features.window, w);
    get(f, "stride", c.features.stride, w);
    get(f, "target_fps", c.features.target_fps, w);
    get(f, "M", c.features.M, w);
    std::vector<int> grid;
    get(f, "lbp_grid", grid, w);
    if (!grid.empty()) {
      require(grid.size() == 2, ErrorCode::kInvalidArgument, "features.lbp_grid: expected [x, y]");
      c.features.lbp.grid_x = grid[0];
      c.features.lbp.grid_y = grid[1];
    }
    get(f, "xy_all_frames", c.features.lbp.xy_all_frames, w);
  }

  if (doc.contains("extract")) {
    const json& e = doc["extract"];
    const std::string w = "extract";
    check_keys(e, w, {"input_dir", "labels", "annotations", "reliability_threshold", "test_fraction"});
    get_path(e, "input_dir", c.extract.input_dir, base, w);
    get_path(e, "labels", c.extract.labels, base, w);
    get_path(e, "annotations", c.extract.annotations, base, w);
    get(e, "reliability_threshold", c.extract.reliability_threshold, w);
    if (e.contains("test_fraction")) c.extract.test_fraction = e["test_fraction"].get<double>();
  }

  if (doc.contains("synth")) {
    const json& s = doc["synth"];
    const std::string w = "synth";
    check_keys(s, w, {"subjects", "videos", "M", "dim", "class_distribution", "signal_fraction",
                      "noise_scale", "test_fraction"});
    auto& spec = c.synth.spec;
    get(s, "subjects", spec.subjects, w);
    get(s, "videos", spec.videos, w);
    get(s, "M", spec.M, w);
    get(s, "dim", spec.dim, w);
    get(s, "class_distribution", spec.class_distribution, w);
    get(s, "signal_fraction", spec.signal_fraction, w);
    get(s, "noise_scale", spec.noise_scale, w);
    if (s.contains("test_fraction")) c.synth.test_fraction = s["test_fraction"].get<double>();
  }

  if (doc.contains("train")) {
    const json& t = doc["train"];
    const std::string w = "train";
    check_keys(t, w, {"dataset", "model", "relabel", "kmeans_k", "augment", "svr", "grid", "sgd",
                      "ridge", "milnet", "seqnet", "optimizer", "audit"});
    auto& tr = c.train;
    get_path(t, "dataset", tr.dataset, base, w);
    get_enum(t, "model", tr.model, parse_model_kind, w);
    get_enum(t, "relabel", tr.relabel, weakdata::parse_relabel_strategy, w);
    get(t, "kmeans_k", tr.kmeans_k, w);
    get(t, "augment", tr.augment, w);
    get_path(t, "audit", tr.audit, base, w);
    if (t.contains("svr")) {
      const json& s = t["svr"];
      check_keys(s, "train.svr", {"C", "epsilon", "sigma", "tol"});
      get(s, "C", tr.svr.C, "train.svr");
      get(s, "epsilon", tr.svr.epsilon, "train.svr");
      get(s, "sigma", tr.svr.kernel.sigma, "train.svr");
      get(s, "tol", tr.svr.tol, "train.svr");
    }
    if (t.contains("grid")) {
      const json& g = t["grid"];
      check_keys(g, "train.grid", {"C", "sigma", "folds"});
      GridConfig grid;
      get(g, "C", grid.C, "train.grid");
      get(g, "sigma", grid.sigma, "train.grid");
      get(g, "folds", grid.folds, "train.grid");
      tr.grid = grid;
    }
    if (t.contains("sgd")) {
      const json& s = t["sgd"];
      check_keys(s, "train.sgd", {"penalty", "epochs", "eta0"});
      get(s, "penalty", tr.sgd.penalty, "train.sgd");
      get(s, "epochs", tr.sgd.epochs, "train.sgd");
      get(s, "eta0", tr.sgd.eta0, "train.sgd");
    }
    if (t.contains("ridge")) {
      const json& r = t["ridge"];
      check_keys(r, "train.ridge", {"max_iter", "tol"});
      get(r, "max_iter", tr.ridge.max_iter, "train.ridge");
      get(r, "tol", tr.ridge.tol, "train.ridge");
    }
    if (t.contains("milnet")) {
      const json& m = t["milnet"];
      check_keys(m, "train.milnet", {"hidden", "pooling", "k"});
      get(m, "hidden", tr.milnet.hidden, "train.milnet");
      tr.milnet.pooling = parse_pooling(m, tr.milnet.pooling, "train.milnet");
    }
    if (t.contains("seqnet")) {
      const json& m = t["seqnet"];
      check_keys(m, "train.seqnet", {"lstm_hidden", "head_hidden"});
      get(m, "lstm_hidden", tr.seqnet.lstm_hidden, "train.seqnet");
      get(m, "head_hidden", tr.seqnet.head_hidden, "train.seqnet");
    }
    if (t.contains("optimizer")) {
      const json& o = t["optimizer"];
      const std::string wo = "train.optimizer";
      check_keys(o, wo, {"step", "epochs", "batch_size", "label_scaling", "clip_norm", "momentum"});
      get(o, "step", tr.optimizer.step, wo);
      get(o, "epochs", tr.optimizer.epochs, wo);
      get(o, "batch_size", tr.optimizer.batch_size, wo);
      get(o, "label_scaling", tr.optimizer.label_scaling, wo);
      get(o, "clip_norm", tr.optimizer.clip_norm, wo);
      get(o, "momentum", tr.optimizer.momentum, wo);
    }
  }

  if (doc.contains("predict")) {
    check_keys(doc["predict"], "predict", {"dataset"});
    get_path(doc["predict"], "dataset", c.predict.dataset, base, "predict");
  }
  if (doc.contains("localize")) {
    check_keys(doc["localize"], "localize", {"dataset", "planted"});
    get_path(doc["localize"], "dataset", c.localize.dataset, base, "localize");
    get_path(doc["localize"], "planted", c.localize.planted, base, "localize");
  }
  if (doc.contains("eval")) {
    check_keys(doc["eval"], "eval", {"predictions", "train_dataset", "test_dataset"});
    get_path(doc["eval"], "predictions", c.eval.predictions, base, "eval");
    get_path(doc["eval"], "train_dataset", c.eval.train_dataset, base, "eval");
    get_path(doc["eval"], "test_dataset", c.eval.test_dataset, base, "eval");
  }
  require(c.jobs >= 1, ErrorCode::kInvalidArgument, "config.jobs must be at least 1");
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kInvalidArgument, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kInvalidArgument, path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

void apply(RunConfig& config, const Overrides& o) {
  if (o.seed) config.seed = *o.seed;
  if (o.jobs) {
    require(*o.jobs >= 1, ErrorCode::kInvalidArgument, "--jobs must be at least 1");
    config.jobs = *o.jobs;
  }
  if (o.model) config.model = *o.model;
  if (o.out) config.out = *o.out;
}

}  // namespace engage::cli
