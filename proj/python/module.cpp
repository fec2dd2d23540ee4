#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "engage_mil/baselines/linear.hpp"
#include "engage_mil/baselines/svr.hpp"
#include "engage_mil/deepmil/net_io.hpp"
#include "engage_mil/deepmil/nets.hpp"
#include "engage_mil/deepmil/train.hpp"
#include "engage_mil/error.hpp"
#include "engage_mil/eval/kappa.hpp"
#include "engage_mil/eval/metrics.hpp"
#include "engage_mil/features/lbp_top.hpp"
#include "engage_mil/features/pose_gaze.hpp"
#include "engage_mil/weakdata/dataset.hpp"
#include "engage_mil/weakdata/dataset_io.hpp"
#include "engage_mil/weakdata/kmeans.hpp"
#include "engage_mil/weakdata/synth.hpp"

namespace py = pybind11;
using namespace engage;

namespace {

using Volume = py::array_t<double, py::array::c_style | py::array::forcecast>;

features::FeatureKind kind_from(const std::string& name) {
  auto k = features::parse_feature_kind(name);
  if (!k) throw py::value_error("feature kind must be 'lbptop' or 'posegaze'");
  return *k;
}

// (B, M, D) array plus per-bag metadata -> Dataset.
weakdata::Dataset to_dataset(const Volume& instances, const std::vector<int>& labels,
                             std::vector<std::string> video_ids, std::vector<std::string> subject_ids,
                             const std::string& kind) {
  if (instances.ndim() != 3) throw py::value_error("instances must have shape (bags, M, dim)");
  const auto B = instances.shape(0), M = instances.shape(1), D = instances.shape(2);
  if (static_cast<py::ssize_t>(labels.size()) != B)
    throw py::value_error("one label per bag expected");
  if (video_ids.empty())
    for (py::ssize_t b = 0; b < B; ++b) video_ids.push_back("v" + std::to_string(b));
  if (subject_ids.empty()) subject_ids = video_ids;
  if (static_cast<py::ssize_t>(video_ids.size()) != B ||
      static_cast<py::ssize_t>(subject_ids.size()) != B)
    throw py::value_error("video_ids and subject_ids need one entry per bag");
  weakdata::Dataset data;
  data.kind = kind_from(kind);
  data.M = M;
  data.dim = D;
  const double* p = instances.data();
  for (py::ssize_t b = 0; b < B; ++b) {
    weakdata::Bag bag;
    bag.video_id = video_ids[b];
    bag.subject_id = subject_ids[b];
    bag.label = labels[b];
    bag.instances = Eigen::Map<const weakdata::InstanceMatrix>(p + b * M * D, M, D);
    data.bags.push_back(std::move(bag));
  }
  data.validate();
  return data;
}

py::dict from_dataset(const weakdata::Dataset& data) {
  py::array_t<double> inst({static_cast<py::ssize_t>(data.size()), static_cast<py::ssize_t>(data.M),
                            static_cast<py::ssize_t>(data.dim)});
  double* p = inst.mutable_data();
  std::vector<std::string> vids, subs;
  for (const auto& b : data.bags) {
    std::copy(b.instances.data(), b.instances.data() + b.instances.size(), p);
    p += b.instances.size();
    vids.push_back(b.video_id);
    subs.push_back(b.subject_id);
  }
  py::dict d;
  d["instances"] = inst;
  d["labels"] = data.labels();
  d["video_ids"] = vids;
  d["subject_ids"] = subs;
  d["kind"] = std::string(features::to_string(data.kind));
  return d;
}

weakdata::Bag single_bag(const Eigen::Ref<const weakdata::InstanceMatrix>& instances) {
  weakdata::Bag bag;
  bag.instances = instances;
  return bag;
}

deepmil::TrainConfig train_config(double step, int epochs, int batch_size, std::uint64_t seed,
                                  bool label_scaling, double clip_norm, double momentum) {
  deepmil::TrainConfig c;
  c.step = step;
  c.epochs = epochs;
  c.batch_size = batch_size;
  c.seed = seed;
  c.label_scaling = label_scaling;
  c.clip_norm = clip_norm;
  c.momentum = momentum;
  return c;
}

py::dict metrics_dict(const eval::MetricsReport& r) {
  py::dict d;
  d["mse"] = r.mse;
  d["pcc"] = r.pcc ? py::cast(*r.pcc) : py::none();
  d["n"] = r.n;
  py::list classwise;
  for (int c = 0; c < eval::kNumClasses; ++c) {
    const auto& m = r.classwise.mse[static_cast<std::size_t>(c)];
    classwise.append(m ? py::cast(*m) : py::none());
  }
  d["classwise_mse"] = classwise;
  d["classwise_count"] = std::vector<std::size_t>(r.classwise.count.begin(), r.classwise.count.end());
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multiple-instance engagement regression: features, weak labels, models, metrics";

  // Raised for every library error; `code` holds the error name, e.g. "invalid-split".
  py::object error_type = py::exception<Error>(m, "EngageError");
  static PyObject* error_ptr = error_type.release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_ptr)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_ptr, exc.ptr());
    }
  });

  // features
  m.def("uniform_bin", [](int code) { return features::uniform_bin(static_cast<std::uint8_t>(code)); });
  m.def(
      "lbp_top",
      [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> frames,
         std::size_t start, std::size_t length, int grid_x, int grid_y, bool xy_all_frames) {
        if (frames.ndim() != 3) throw py::value_error("frames must have shape (T, H, W)");
        features::FrameSequence seq;
        seq.fps = 6.0;
        const auto T = frames.shape(0), H = frames.shape(1), W = frames.shape(2);
        for (py::ssize_t t = 0; t < T; ++t) {
          features::GrayImage img(static_cast<int>(W), static_cast<int>(H));
          std::copy(frames.data(t, 0, 0), frames.data(t, 0, 0) + H * W, img.pixels.begin());
          seq.frames.push_back(std::move(img));
        }
        return features::lbp_top(seq, {start, length, 1}, {grid_x, grid_y, xy_all_frames});
      },
      py::arg("frames"), py::arg("start"), py::arg("length"), py::arg("grid_x") = 1,
      py::arg("grid_y") = 1, py::arg("xy_all_frames") = true);
  m.def(
      "pose_gaze_feature",
      [](const Eigen::Ref<const Eigen::Matrix<double, Eigen::Dynamic, 12, Eigen::RowMajor>>& rows,
         std::size_t start, std::size_t length) {
        features::PoseGazeTrack track;
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
          features::PoseGazeRecord r;
          for (int j = 0; j < 3; ++j) {
            r.translation[j] = rows(i, j);
            r.rotation[j] = rows(i, 3 + j);
            r.gaze_left[j] = rows(i, 6 + j);
            r.gaze_right[j] = rows(i, 9 + j);
          }
          track.records.push_back(r);
        }
        return features::pose_gaze_feature(track, {start, length, 1});
      },
      py::arg("track"), py::arg("start"), py::arg("length"),
      "Track rows: Tx Ty Tz Rx Ry Rz, left gaze xyz, right gaze xyz.");
  m.def(
      "segment",
      [](std::size_t n, std::size_t length, std::size_t stride) {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const auto& w : features::segment(n, length, stride)) out.emplace_back(w.start, w.length);
        return out;
      },
      py::arg("frame_count"), py::arg("length"), py::arg("stride"));

  // weakdata
  m.def("resample_indices", &weakdata::resample_indices, py::arg("count"), py::arg("M"));
  m.def(
      "synth_generate",
      [](int subjects, int videos, int M, int dim, std::array<double, 4> distribution,
         double signal_fraction, double noise_scale, std::uint64_t seed) {
        weakdata::SyntheticSpec spec;
        spec.subjects = subjects;
        spec.videos = videos;
        spec.M = M;
        spec.dim = dim;
        spec.class_distribution = distribution;
        spec.signal_fraction = signal_fraction;
        spec.noise_scale = noise_scale;
        spec.seed = seed;
        const auto s = weakdata::synth_generate(spec);
        py::dict d = from_dataset(s.dataset);
        d["planted"] = s.planted;
        return d;
      },
      py::arg("subjects") = 78, py::arg("videos") = 195, py::arg("M") = 100, py::arg("dim") = 9,
      py::arg("class_distribution") = weakdata::SyntheticSpec{}.class_distribution,
      py::arg("signal_fraction") = 0.3, py::arg("noise_scale") = 0.5, py::arg("seed") = 0);
  m.def(
      "kmeans",
      [](const Eigen::MatrixXd& points, int k, std::uint64_t seed) {
        const auto r = weakdata::kmeans(points, k, seed);
        return py::make_tuple(r.assignments, r.centroids, r.inertia);
      },
      py::arg("points"), py::arg("k"), py::arg("seed") = 0);
  m.def(
      "read_dataset", [](const std::filesystem::path& p) { return from_dataset(weakdata::read_dataset(p)); },
      py::arg("index_path"));
  m.def(
      "write_dataset",
      [](const std::filesystem::path& p, const Volume& instances, const std::vector<int>& labels,
         std::vector<std::string> video_ids, std::vector<std::string> subject_ids,
         const std::string& kind) {
        weakdata::write_dataset(p, to_dataset(instances, labels, video_ids, subject_ids, kind));
      },
      py::arg("index_path"), py::arg("instances"), py::arg("labels"),
      py::arg("video_ids") = std::vector<std::string>{}, py::arg("subject_ids") = std::vector<std::string>{},
      py::arg("kind") = "posegaze");
  m.def(
      "split_subject_independent",
      [](const Volume& instances, const std::vector<int>& labels, std::vector<std::string> video_ids,
         std::vector<std::string> subject_ids, double test_fraction, std::uint64_t seed) {
        const auto data = to_dataset(instances, labels, video_ids, subject_ids, "posegaze");
        const auto [train, test] = weakdata::split_subject_independent(data, test_fraction, seed);
        return py::make_tuple(from_dataset(train), from_dataset(test));
      },
      py::arg("instances"), py::arg("labels"), py::arg("video_ids"), py::arg("subject_ids"),
      py::arg("test_fraction"), py::arg("seed") = 0);

  // deepmil
  m.def("topk_pool", [](const std::vector<double>& r, int k) { return deepmil::topk_pool(r, k); },
        py::arg("r"), py::arg("k"));
  m.def("mean_pool", [](const std::vector<double>& r) { return deepmil::mean_pool(r); }, py::arg("r"));

  py::class_<deepmil::MilNet>(m, "MilNet")
      .def_property_readonly("input_dim", &deepmil::MilNet::input_dim)
      .def("predict", [](const deepmil::MilNet& n, const weakdata::InstanceMatrix& x) {
        return deepmil::predict(n, single_bag(x));
      })
      .def("localize", [](const deepmil::MilNet& n, const weakdata::InstanceMatrix& x) {
        return deepmil::localize(n, single_bag(x));
      })
      .def("save", [](const deepmil::MilNet& n, const std::filesystem::path& p, const std::string& kind) {
        deepmil::save_net(p, n, kind_from(kind));
      }, py::arg("path"), py::arg("kind") = "posegaze");

  py::class_<deepmil::SeqNet>(m, "SeqNet")
      .def_property_readonly("input_dim", &deepmil::SeqNet::input_dim)
      .def_readonly("M", &deepmil::SeqNet::M)
      .def("predict", [](const deepmil::SeqNet& n, const weakdata::InstanceMatrix& x) {
        return deepmil::predict(n, single_bag(x));
      })
      .def("localize", [](const deepmil::SeqNet& n, const weakdata::InstanceMatrix& x) {
        return deepmil::localize(n, single_bag(x));
      })
      .def("save", [](const deepmil::SeqNet& n, const std::filesystem::path& p, const std::string& kind) {
        deepmil::save_net(p, n, kind_from(kind));
      }, py::arg("path"), py::arg("kind") = "posegaze");

  m.def(
      "train_milnet",
      [](const Volume& instances, const std::vector<int>& labels, std::vector<int> hidden,
         const std::string& pooling, int k, double step, int epochs, int batch_size,
         std::uint64_t seed, bool label_scaling, double clip_norm, double momentum) {
        const auto data = to_dataset(instances, labels, {}, {}, "posegaze");
        deepmil::MilNetSpec spec;
        spec.hidden = std::move(hidden);
        if (pooling == "topk") spec.pooling = {deepmil::PoolingKind::kTopK, k};
        else if (pooling == "mean") spec.pooling = {deepmil::PoolingKind::kMean, k};
        else throw py::value_error("pooling must be 'topk' or 'mean'");
        auto r = [&] {
          py::gil_scoped_release release;
          return deepmil::train(deepmil::make_milnet(data.dim, spec, seed), data,
                                train_config(step, epochs, batch_size, seed + 1, label_scaling,
                                               clip_norm, momentum));
        }();
        return py::make_tuple(std::move(r.net), std::move(r.loss_trace));
      },
      py::arg("instances"), py::arg("labels"), py::arg("hidden") = std::vector<int>{128, 64, 32},
      py::arg("pooling") = "topk", py::arg("k") = 10, py::arg("step") = 0.01, py::arg("epochs") = 300,
      py::arg("batch_size") = 1, py::arg("seed") = 0, py::arg("label_scaling") = true,
      py::arg("clip_norm") = 5.0, py::arg("momentum") = 0.0,
      "Returns (net, loss_trace). Initialisation uses seed, shuffling seed + 1.");
  m.def(
      "train_seqnet",
      [](const Volume& instances, const std::vector<int>& labels, int lstm_hidden,
         std::vector<int> head_hidden, double step, int epochs, int batch_size, std::uint64_t seed,
         bool label_scaling, double clip_norm, double momentum) {
        const auto data = to_dataset(instances, labels, {}, {}, "posegaze");
        deepmil::SeqNetSpec spec{lstm_hidden, std::move(head_hidden)};
        auto r = [&] {
          py::gil_scoped_release release;
          return deepmil::train(deepmil::make_seqnet(data.dim, data.M, spec, seed), data,
                                train_config(step, epochs, batch_size, seed + 1, label_scaling,
                                               clip_norm, momentum));
        }();
        return py::make_tuple(std::move(r.net), std::move(r.loss_trace));
      },
      py::arg("instances"), py::arg("labels"), py::arg("lstm_hidden") = 32,
      py::arg("head_hidden") = std::vector<int>{64, 32}, py::arg("step") = 0.01,
      py::arg("epochs") = 300, py::arg("batch_size") = 1, py::arg("seed") = 0,
      py::arg("label_scaling") = true, py::arg("clip_norm") = 5.0, py::arg("momentum") = 0.0);
  m.def(
      "load_net",
      [](const std::filesystem::path& p) {
        auto loaded = deepmil::load_net(p);
        return std::visit([](auto& net) { return py::cast(std::move(net)); }, loaded.net);
      },
      py::arg("path"));

  // baselines
  py::class_<baselines::SvrModel>(m, "SvrModel")
      .def_readonly("bias", &baselines::SvrModel::bias)
      .def_readonly("coefficients", &baselines::SvrModel::coefficients)
      .def_readonly("dual_objective", &baselines::SvrModel::dual_objective)
      .def_readonly("iterations", &baselines::SvrModel::iterations)
      .def_property_readonly("n_support", [](const baselines::SvrModel& s) { return s.support_vectors.rows(); })
      .def("predict", [](const baselines::SvrModel& s, const Eigen::MatrixXd& x) {
        return baselines::svr_predict_rows(s, x);
      });
  m.def(
      "svr_train",
      [](const Eigen::MatrixXd& x, const std::vector<double>& y, double C, double epsilon,
         double sigma, double tol) {
        baselines::SvrConfig c;
        c.C = C;
        c.epsilon = epsilon;
        c.kernel.sigma = sigma;
        c.tol = tol;
        py::gil_scoped_release release;
        return baselines::svr_train(x, y, c);
      },
      py::arg("x"), py::arg("y"), py::arg("C") = 1.0, py::arg("epsilon") = 0.1,
      py::arg("sigma") = 1.0, py::arg("tol") = 1e-3);
  m.def(
      "sgd_linear_train",
      [](const Eigen::MatrixXd& x, const std::vector<double>& y, double penalty, int epochs,
         double eta0, std::uint64_t seed) {
        const auto r = baselines::sgd_linear_train(x, y, {penalty, epochs, eta0, seed});
        return py::make_tuple(r.model.weights, r.model.bias, r.loss_trace);
      },
      py::arg("x"), py::arg("y"), py::arg("penalty") = 1e-4, py::arg("epochs") = 50,
      py::arg("eta0") = 0.01, py::arg("seed") = 0, "Returns (weights, bias, loss_trace).");
  m.def(
      "bayesian_ridge_train",
      [](const Eigen::MatrixXd& x, const std::vector<double>& y) {
        const auto r = baselines::bayesian_ridge_train(x, y);
        return py::make_tuple(r.mean, r.bias, r.alpha, r.beta);
      },
      py::arg("x"), py::arg("y"), "Returns (weights, bias, alpha, beta).");

  // eval
  m.def(
      "quadratic_weighted_kappa",
      [](const std::vector<int>& a, const std::vector<int>& b, int levels) {
        return eval::quadratic_weighted_kappa(a, b, levels);
      },
      py::arg("a"), py::arg("b"), py::arg("num_levels") = 4);
  m.def(
      "fuse_labels",
      [](const std::vector<std::vector<std::optional<int>>>& ratings, double threshold) {
        eval::AnnotationMatrix ann;
        ann.ratings = ratings;
        const auto r = eval::fuse_labels(ann, threshold);
        return py::make_tuple(r.labels, r.reliability, r.dropped);
      },
      py::arg("ratings"), py::arg("reliability_threshold") = 0.4,
      "ratings[video][rater], None for missing. Returns (labels, reliability, dropped).");
  m.def("mse", [](const std::vector<double>& p, const std::vector<double>& t) { return eval::mse(p, t); });
  m.def("pcc", [](const std::vector<double>& p, const std::vector<double>& t) { return eval::pcc(p, t); });
  m.def(
      "evaluate",
      [](const std::vector<double>& p, const std::vector<double>& t) {
        return metrics_dict(eval::evaluate(p, t));
      },
      py::arg("pred"), py::arg("truth"));
}
