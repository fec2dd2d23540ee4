#include "engage_mil/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "engage_mil/baselines/grid_search.hpp"
#include "engage_mil/csv.hpp"
#include "engage_mil/deepmil/net_io.hpp"
#include "engage_mil/deepmil/train.hpp"
#include "engage_mil/eval/kappa.hpp"
#include "engage_mil/eval/metrics.hpp"
#include "engage_mil/features/io.hpp"
#include "engage_mil/features/lbp_top.hpp"
#include "engage_mil/features/pose_gaze.hpp"
#include "engage_mil/weakdata/dataset_io.hpp"
#include "engage_mil/weakdata/kmeans.hpp"
#include "engage_mil/weakdata/relabel.hpp"
#include "engage_mil/weakdata/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace engage::cli {

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidK:
    case ErrorCode::kInvalidFolds:
    case ErrorCode::kInvalidSplit:
      return 2;
    case ErrorCode::kTrainingDiverged:
      return 4;
    default:
      return 3;
  }
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

void require_path(const fs::path& p, const char* what) {
  require(!p.empty(), ErrorCode::kInvalidArgument, std::string(what) + " is not set");
}

std::map<std::string, int> read_labels_csv(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open labels " + path.string());
  std::map<std::string, int> labels;
  std::string line;
  std::size_t line_no = 1;
  std::getline(in, line);
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto cells = csv::split(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    require(cells.size() == 2, ErrorCode::kParseError, where + ": expected video_id,label");
    int label = -1;
    try {
      std::size_t used = 0;
      label = std::stoi(cells[1], &used);
      require(used == cells[1].size(), ErrorCode::kParseError, where + ": bad label");
    } catch (const std::logic_error&) {
      fail(ErrorCode::kParseError, where + ": bad label '" + cells[1] + "'");
    }
    require(label >= 0 && label < weakdata::kNumLevels, ErrorCode::kParseError,
            where + ": label outside 0..3");
    require(labels.emplace(cells[0], label).second, ErrorCode::kParseError,
            where + ": duplicate video '" + cells[0] + "'");
  }
  return labels;
}

// Video id -> label, or -1 when fusion left the video without a reliable rating.
std::map<std::string, int> collect_labels(const ExtractConfig& e) {
  if (!e.labels.empty()) return read_labels_csv(e.labels);
  require(!e.annotations.empty(), ErrorCode::kInvalidArgument,
          "extract needs either extract.labels or extract.annotations");
  const eval::AnnotationMatrix ann = eval::read_annotations_csv(e.annotations);
  const eval::FusionResult fused = eval::fuse_labels(ann, e.reliability_threshold);
  for (std::size_t r = 0; r < ann.raters(); ++r)
    spdlog::info("rater {}: reliability {:.4f}", ann.rater_names[r], fused.reliability[r]);
  for (std::size_t r : fused.dropped) spdlog::info("dropped rater {}", ann.rater_names[r]);
  std::map<std::string, int> labels;
  for (std::size_t v = 0; v < ann.videos(); ++v) labels[ann.video_ids[v]] = fused.labels[v];
  return labels;
}

struct VideoJob {
  fs::path dir;
  features::VideoManifest manifest;
  int label = 0;
};

struct VideoResult {
  weakdata::Bag bag;
  std::size_t segments = 0;
};

VideoResult extract_video(const VideoJob& job, const FeatureConfig& f) {
  std::vector<features::SegmentFeature> segs;
  const auto& m = job.manifest;
  if (f.kind == features::FeatureKind::kPoseGaze) {
    const auto track = features::subsample(
        features::read_pose_gaze_csv(job.dir / "pose_gaze.csv"), m.fps, f.target_fps);
    for (const auto& w : features::segment(track.size(), f.window, f.stride)) {
      const auto v = features::pose_gaze_feature(track, w);
      segs.push_back({std::vector<double>(v.begin(), v.end()), f.kind, w});
    }
  } else {
    const auto seq = features::subsample(features::read_frame_archive(job.dir, m), f.target_fps);
    for (const auto& w : features::segment(seq, f.window, f.stride))
      segs.push_back({features::lbp_top(seq, w, f.lbp), f.kind, w});
  }
  VideoResult r;
  r.segments = segs.size();
  r.bag = weakdata::make_bag(segs, f.M, m.video_id, m.subject_id, job.label);
  return r;
}

// Runs fn(i) for i in [0, n) on `jobs` threads. Errors are rethrown in index
// order after every worker has finished, so the reported failure is stable.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = static_cast<int>(std::min<std::size_t>(std::max(jobs, 1), std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void write_splits(const fs::path& dir, const weakdata::Dataset& data,
                  const std::optional<double>& fraction, std::uint64_t seed) {
  if (!fraction) return;
  const auto [train, test] = weakdata::split_subject_independent(data, *fraction, seed);
  weakdata::write_index(dir / "train.json", train, dir);
  weakdata::write_index(dir / "test.json", test, dir);
  spdlog::info("split: {} train / {} test videos", train.size(), test.size());
}

void write_loss_csv(const fs::path& path, const char* column, const std::vector<double>& trace) {
  auto out = open_out(path);
  out << "epoch," << column << '\n';
  for (std::size_t i = 0; i < trace.size(); ++i) out << i + 1 << ',' << num(trace[i]) << '\n';
}

std::vector<double> flatten(const weakdata::InstanceLabeling& labeling) {
  std::vector<double> y;
  for (const auto& bag : labeling.labels) y.insert(y.end(), bag.begin(), bag.end());
  return y;
}

json linear_document(json body, features::FeatureKind kind, Eigen::Index dim) {
  body["feature_kind"] = features::to_string(kind);
  body["dim"] = dim;
  return body;
}

struct IndexEntry {
  std::string video_id;
  std::string subject_id;
  int label = 0;
};

// Reads only the index, never the feature files.
std::vector<IndexEntry> read_index_entries(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open dataset index " + path.string());
  try {
    const json j = json::parse(in);
    std::vector<IndexEntry> out;
    for (const auto& v : j.at("videos"))
      out.push_back({v.at("video_id").get<std::string>(), v.at("subject_id").get<std::string>(),
                     v.at("label").get<int>()});
    return out;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

}  // namespace

void cmd_extract(const RunConfig& config, std::ostream& out) {
  const ExtractConfig& e = config.extract;
  require_path(e.input_dir, "extract.input_dir");
  require_path(config.out, "out");
  require(fs::is_directory(e.input_dir), ErrorCode::kIo,
          "input directory " + e.input_dir.string() + " does not exist");

  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(e.input_dir))
    if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) dirs.push_back(entry.path());
  require(!dirs.empty(), ErrorCode::kInvalidInput,
          "no videos found in " + e.input_dir.string());
  std::sort(dirs.begin(), dirs.end());

  const auto labels = collect_labels(e);
  std::vector<VideoJob> jobs;
  for (const auto& dir : dirs) {
    VideoJob job{dir, features::read_manifest(dir / "manifest.json"), 0};
    const auto it = labels.find(job.manifest.video_id);
    require(it != labels.end(), ErrorCode::kInvalidInput,
            "no label for video '" + job.manifest.video_id + "'");
    if (it->second < 0) {
      spdlog::warn("{}: no reliable rating, skipped", job.manifest.video_id);
      continue;
    }
    job.label = it->second;
    jobs.push_back(std::move(job));
  }
  std::sort(jobs.begin(), jobs.end(), [](const VideoJob& a, const VideoJob& b) {
    return a.manifest.video_id < b.manifest.video_id;
  });
  for (std::size_t i = 1; i < jobs.size(); ++i)
    require(jobs[i].manifest.video_id != jobs[i - 1].manifest.video_id, ErrorCode::kInvalidInput,
            "duplicate video id '" + jobs[i].manifest.video_id + "'");
  require(!jobs.empty(), ErrorCode::kInvalidInput, "no labelled videos found");

  fs::create_directories(config.out);
  std::vector<VideoResult> results(jobs.size());
  parallel_for(jobs.size(), config.jobs, [&](std::size_t i) {
    results[i] = extract_video(jobs[i], config.features);
    weakdata::write_feature_file(config.out / (results[i].bag.video_id + ".emil"),
                                 results[i].bag.instances);
  });

  weakdata::Dataset data;
  data.kind = config.features.kind;
  data.M = static_cast<Eigen::Index>(config.features.M);
  for (auto& r : results) {
    out << r.bag.video_id << ": " << r.segments << " segments -> " << r.bag.size()
        << " instances\n";
    data.dim = r.bag.dim();
    data.bags.push_back(std::move(r.bag));
  }
  data.validate();
  weakdata::write_index(config.out / "index.json", data, config.out);
  write_splits(config.out, data, e.test_fraction, config.seed);
}

void cmd_synth(const RunConfig& config, std::ostream& out) {
  require_path(config.out, "out");
  weakdata::SyntheticSpec spec = config.synth.spec;
  spec.seed = config.seed;
  const auto synth = weakdata::synth_generate(spec);
  fs::create_directories(config.out);
  weakdata::write_dataset(config.out / "index.json", synth.dataset);
  weakdata::write_planted_csv(config.out / "planted.csv", synth.dataset, synth.planted);
  std::array<int, weakdata::kNumLevels> counts{};
  for (const auto& b : synth.dataset.bags) ++counts[static_cast<std::size_t>(b.label)];
  out << synth.dataset.size() << " videos, " << synth.dataset.subjects().size()
      << " subjects, class counts " << counts[0] << '/' << counts[1] << '/' << counts[2] << '/'
      << counts[3] << '\n';
  write_splits(config.out, synth.dataset, config.synth.test_fraction, config.seed);
}

void cmd_train(const RunConfig& config, std::ostream& out) {
  const TrainSection& t = config.train;
  require_path(t.dataset, "train.dataset");
  require_path(config.model, "model");

  std::vector<std::string> audit;
  weakdata::Dataset data = weakdata::read_dataset(
      t.dataset, [&](const fs::path& p) { audit.push_back(p.lexically_normal().generic_string()); });
  if (!t.audit.empty()) {
    auto log = open_out(t.audit);
    for (const auto& p : audit) log << p << '\n';
  }
  if (t.augment) data = weakdata::augment(data);
  spdlog::info("training {} on {} bags (M={}, dim={})", to_string(t.model), data.size(), data.M,
               data.dim);

  if (config.model.has_parent_path()) fs::create_directories(config.model.parent_path());
  const fs::path loss_path = config.model.string() + ".loss.csv";
  const features::FeatureKind kind = data.kind;

  switch (t.model) {
    case ModelKind::kMilNet:
    case ModelKind::kSeqNet: {
      deepmil::TrainConfig opt = t.optimizer;
      opt.seed = config.seed + 1;
      try {
        if (t.model == ModelKind::kMilNet) {
          auto result = deepmil::train(deepmil::make_milnet(data.dim, t.milnet, config.seed), data, opt);
          deepmil::save_net(config.model, result.net, kind);
          write_loss_csv(loss_path, "loss", result.loss_trace);
        } else {
          auto result =
              deepmil::train(deepmil::make_seqnet(data.dim, data.M, t.seqnet, config.seed), data, opt);
          deepmil::save_net(config.model, result.net, kind);
          write_loss_csv(loss_path, "loss", result.loss_trace);
        }
      } catch (const deepmil::TrainingDiverged& d) {
        write_loss_csv(loss_path, "loss", d.trace());
        throw;
      }
      break;
    }
    case ModelKind::kSvr:
    case ModelKind::kSgd:
    case ModelKind::kRidge: {
      std::vector<int> assignments;
      if (t.relabel != weakdata::RelabelStrategy::kNoisy)
        assignments =
            weakdata::kmeans(weakdata::stack_instances(data), t.kmeans_k, config.seed).assignments;
      const auto labeling =
          weakdata::relabel(data, t.relabel, assignments.empty() ? nullptr : &assignments);
      const Eigen::MatrixXd X = weakdata::stack_instances(data);
      const std::vector<double> y = flatten(labeling);

      if (t.model == ModelKind::kSvr) {
        baselines::SvrConfig svr = t.svr;
        if (t.grid) {
          const auto grid = baselines::grid_search_svr(data, labeling, t.grid->C, t.grid->sigma,
                                                       t.grid->folds, config.seed, svr);
          auto csv_out = open_out(config.model.string() + ".grid.csv");
          csv_out << "C,sigma,mse\n";
          for (const auto& cell : grid.table)
            csv_out << num(cell.C) << ',' << num(cell.sigma) << ',' << num(cell.mse) << '\n';
          svr.C = grid.best_C;
          svr.kernel.sigma = grid.best_sigma;
          out << "grid search: C=" << num(svr.C) << " sigma=" << num(svr.kernel.sigma) << '\n';
        }
        const auto model = baselines::svr_train(X, y, svr);
        baselines::save_svr(config.model, model, kind);
        write_loss_csv(loss_path, "dual_objective", {model.dual_objective});
      } else if (t.model == ModelKind::kSgd) {
        baselines::SgdConfig sgd = t.sgd;
        sgd.seed = config.seed + 1;
        const auto result = baselines::sgd_linear_train(X, y, sgd);
        open_out(config.model) << linear_document(baselines::to_json(result.model), kind, data.dim).dump(2)
                               << '\n';
        write_loss_csv(loss_path, "objective", result.loss_trace);
      } else {
        const auto model = baselines::bayesian_ridge_train(X, y, t.ridge);
        open_out(config.model) << linear_document(baselines::to_json(model), kind, data.dim).dump(2)
                               << '\n';
        write_loss_csv(loss_path, "alpha", {model.alpha});
      }
      break;
    }
  }
  out << "model written to " << config.model.string() << '\n';
}

AnyModel load_model(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot open model " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  const std::string tag(magic, static_cast<std::size_t>(in.gcount()));
  in.close();

  AnyModel m;
  if (tag == "EMNN") {
    auto loaded = deepmil::load_net(path);
    m.kind = loaded.kind;
    std::visit([&](auto& net) { m.model = std::move(net); }, loaded.net);
    return m;
  }
  if (tag == "ESVR") {
    m.model = baselines::load_svr(path);
    std::ifstream side(path.string() + ".json");
    require(side.good(), ErrorCode::kIo, "missing sidecar " + path.string() + ".json");
    try {
      const auto kind = features::parse_feature_kind(json::parse(side).at("feature_kind").get<std::string>());
      require(kind.has_value(), ErrorCode::kParseError, path.string() + ".json: bad feature_kind");
      m.kind = *kind;
    } catch (const json::exception& e) {
      fail(ErrorCode::kParseError, path.string() + ".json: " + e.what());
    }
    return m;
  }
  std::ifstream text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    fail(ErrorCode::kParseError, path.string() + ": not a model file");
  }
  std::string name;
  try {
    name = j.at("model").get<std::string>();
    const auto kind = features::parse_feature_kind(j.at("feature_kind").get<std::string>());
    require(kind.has_value(), ErrorCode::kParseError, path.string() + ": bad feature_kind");
    m.kind = *kind;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  if (name == "sgd") m.model = baselines::linear_from_json(j);
  else if (name == "ridge") m.model = baselines::ridge_from_json(j);
  else fail(ErrorCode::kParseError, path.string() + ": unknown model '" + name + "'");
  return m;
}

namespace {

Eigen::Index model_dim(const AnyModel& m) {
  struct {
    Eigen::Index operator()(const baselines::SvrModel& s) const { return s.dim(); }
    Eigen::Index operator()(const baselines::LinearModel& l) const { return l.weights.size(); }
    Eigen::Index operator()(const baselines::RidgePosterior& r) const { return r.mean.size(); }
    Eigen::Index operator()(const deepmil::MilNet& n) const { return n.input_dim(); }
    Eigen::Index operator()(const deepmil::SeqNet& n) const { return n.input_dim(); }
  } dim;
  return std::visit(dim, m.model);
}

}  // namespace

void check_compatible(const AnyModel& m, const weakdata::Dataset& data) {
  require(m.kind == data.kind, ErrorCode::kIncompatibleArtifacts,
          "model expects " + std::string(features::to_string(m.kind)) + " features, dataset has " +
              std::string(features::to_string(data.kind)));
  require(model_dim(m) == data.dim, ErrorCode::kIncompatibleArtifacts,
          "model dimension " + std::to_string(model_dim(m)) + " != dataset dimension " +
              std::to_string(data.dim));
  if (const auto* seq = std::get_if<deepmil::SeqNet>(&m.model))
    require(seq->M == data.M, ErrorCode::kIncompatibleArtifacts,
            "model M " + std::to_string(seq->M) + " != dataset M " + std::to_string(data.M));
}

Eigen::VectorXd instance_scores(const AnyModel& m, const weakdata::Bag& bag) {
  const Eigen::MatrixXd X = bag.instances;
  struct {
    const Eigen::MatrixXd& X;
    const weakdata::Bag& bag;
    Eigen::VectorXd operator()(const baselines::SvrModel& s) const {
      return baselines::svr_predict_rows(s, X);
    }
    Eigen::VectorXd operator()(const baselines::LinearModel& l) const {
      return (X * l.weights).array() + l.bias;
    }
    Eigen::VectorXd operator()(const baselines::RidgePosterior& r) const {
      return (X * r.mean).array() + r.bias;
    }
    Eigen::VectorXd operator()(const deepmil::MilNet& n) const { return deepmil::localize(n, bag); }
    Eigen::VectorXd operator()(const deepmil::SeqNet& n) const { return deepmil::localize(n, bag); }
  } visitor{X, bag};
  return std::visit(visitor, m.model);
}

double bag_score(const AnyModel& m, const weakdata::Bag& bag) {
  if (const auto* n = std::get_if<deepmil::MilNet>(&m.model)) return deepmil::predict(*n, bag);
  if (const auto* n = std::get_if<deepmil::SeqNet>(&m.model)) return deepmil::predict(*n, bag);
  const Eigen::VectorXd r = instance_scores(m, bag);
  return baselines::aggregate_video(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())));
}

void cmd_predict(const RunConfig& config, std::ostream& out) {
  require_path(config.model, "model");
  require_path(config.predict.dataset, "predict.dataset");
  require_path(config.out, "out");
  const AnyModel model = load_model(config.model);
  const auto data = weakdata::read_dataset(config.predict.dataset);
  check_compatible(model, data);
  auto csv_out = open_out(config.out);
  csv_out << "video_id,subject_id,label,prediction\n";
  for (const auto& bag : data.bags)
    csv_out << bag.video_id << ',' << bag.subject_id << ',' << bag.label << ','
            << num(bag_score(model, bag)) << '\n';
  out << data.size() << " predictions written to " << config.out.string() << '\n';
}

void cmd_localize(const RunConfig& config, std::ostream& out) {
  require_path(config.model, "model");
  require_path(config.localize.dataset, "localize.dataset");
  require_path(config.out, "out");
  const AnyModel model = load_model(config.model);
  const auto data = weakdata::read_dataset(config.localize.dataset);
  check_compatible(model, data);
  std::vector<std::vector<double>> planted;
  if (!config.localize.planted.empty())
    planted = weakdata::read_planted_csv(config.localize.planted, data);

  // Per-label running sums for the averaged curves.
  std::array<Eigen::VectorXd, weakdata::kNumLevels> sums;
  std::array<int, weakdata::kNumLevels> videos{};
  for (auto& s : sums) s = Eigen::VectorXd::Zero(data.M);

  auto csv_out = open_out(config.out);
  csv_out << "video_id,segment_index,intensity" << (planted.empty() ? "" : ",planted") << '\n';
  std::size_t rows = 0;
  for (std::size_t b = 0; b < data.size(); ++b) {
    const auto& bag = data.bags[b];
    const Eigen::VectorXd r = instance_scores(model, bag);
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      csv_out << bag.video_id << ',' << i << ',' << num(r[i]);
      if (!planted.empty()) csv_out << ',' << num(planted[b][static_cast<std::size_t>(i)]);
      csv_out << '\n';
      ++rows;
    }
    sums[static_cast<std::size_t>(bag.label)] += r;
    ++videos[static_cast<std::size_t>(bag.label)];
  }

  const fs::path curves = config.out.parent_path() / (config.out.stem().string() + "_curves.csv");
  auto curve_out = open_out(curves);
  curve_out << "label,segment_index,mean_intensity,videos\n";
  for (int level = 0; level < weakdata::kNumLevels; ++level) {
    const auto l = static_cast<std::size_t>(level);
    if (videos[l] == 0) continue;
    for (Eigen::Index i = 0; i < data.M; ++i)
      curve_out << level << ',' << i << ',' << num(sums[l][i] / videos[l]) << ',' << videos[l]
                << '\n';
  }
  out << rows << " localization rows written to " << config.out.string() << '\n';
}

void cmd_eval(const RunConfig& config, std::ostream& out) {
  const EvalSection& e = config.eval;
  require_path(e.predictions, "eval.predictions");
  require_path(e.train_dataset, "eval.train_dataset");
  require_path(e.test_dataset, "eval.test_dataset");
  require_path(config.out, "out");

  std::set<std::string> train_subjects;
  for (const auto& v : read_index_entries(e.train_dataset)) train_subjects.insert(v.subject_id);
  std::map<std::string, IndexEntry> test;
  for (const auto& v : read_index_entries(e.test_dataset)) {
    require(!train_subjects.count(v.subject_id), ErrorCode::kInvalidSplit,
            "subject '" + v.subject_id + "' appears in both train and test sets");
    test[v.video_id] = v;
  }

  std::ifstream in(e.predictions);
  require(in.good(), ErrorCode::kIo, "cannot open predictions " + e.predictions.string());
  std::vector<double> pred, truth;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 1;
  std::getline(in, line);
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const std::string where = e.predictions.string() + ":" + std::to_string(line_no);
    const auto cells = csv::split(line);
    require(cells.size() == 4, ErrorCode::kParseError,
            where + ": expected video_id,subject_id,label,prediction");
    const auto it = test.find(cells[0]);
    require(it != test.end(), ErrorCode::kInvalidSplit,
            where + ": video '" + cells[0] + "' is not in the test set");
    require(seen.insert(cells[0]).second, ErrorCode::kParseError,
            where + ": duplicate video '" + cells[0] + "'");
    double p = 0.0;
    try {
      p = std::stod(cells[3]);
    } catch (const std::logic_error&) {
      fail(ErrorCode::kParseError, where + ": bad prediction '" + cells[3] + "'");
    }
    pred.push_back(p);
    truth.push_back(it->second.label);
  }
  require(!pred.empty(), ErrorCode::kInvalidInput, e.predictions.string() + ": no predictions");
  if (seen.size() != test.size())
    spdlog::warn("{} of {} test videos have predictions", seen.size(), test.size());

  const auto report = eval::evaluate(pred, truth);
  open_out(config.out) << eval::to_json(report).dump(2) << '\n';
  out << "mse " << num(report.mse) << ", pcc "
      << (report.pcc ? num(*report.pcc) : std::string("undefined")) << ", n " << report.n << '\n';
}

}  // namespace engage::cli
