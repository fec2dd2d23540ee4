#include "engage_mil/baselines/svr.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <list>
#include <unordered_map>

#include "engage_mil/binary_io.hpp"
#include "engage_mil/error.hpp"
#include "json.hpp"

namespace engage::baselines {
namespace fs = std::filesystem;

double KernelSpec::operator()(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                              const Eigen::Ref<const Eigen::RowVectorXd>& b) const {
  return std::exp(-(a - b).squaredNorm() / (2.0 * sigma * sigma));
}

void SvrConfig::validate() const {
  require(C > 0.0, ErrorCode::kInvalidArgument, "C must be positive");
  require(epsilon >= 0.0, ErrorCode::kInvalidArgument, "epsilon must be >= 0");
  require(kernel.sigma > 0.0, ErrorCode::kInvalidArgument, "sigma must be positive");
  require(tol > 0.0, ErrorCode::kInvalidArgument, "tol must be positive");
}

SvrConfig svr_preset_mode() {
  SvrConfig c;
  c.C = 1.0;
  c.kernel.sigma = 1.0;
  return c;
}

SvrConfig svr_preset_mean() {
  SvrConfig c;
  c.C = 1.0;
  c.kernel.sigma = 4.0;
  return c;
}

namespace {

constexpr double kTau = 1e-12;

// LRU cache of kernel rows K(i, .) over the n training points.
class KernelRows {
 public:
  KernelRows(const Eigen::Ref<const Eigen::MatrixXd>& x, const KernelSpec& kernel, double cache_mb)
      : x_(x), kernel_(kernel) {
    const double row_bytes = static_cast<double>(x.rows()) * sizeof(double);
    capacity_ = std::max<std::size_t>(2, static_cast<std::size_t>(cache_mb * 1048576.0 / row_bytes));
  }

  const Eigen::VectorXd& row(Eigen::Index i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    Eigen::VectorXd r(x_.rows());
    const double inv = 1.0 / (2.0 * kernel_.sigma * kernel_.sigma);
    for (Eigen::Index k = 0; k < x_.rows(); ++k)
      r[k] = std::exp(-(x_.row(i) - x_.row(k)).squaredNorm() * inv);
    lru_.emplace_front(i, std::move(r));
    index_[i] = lru_.begin();
    return lru_.front().second;
  }

 private:
  const Eigen::Ref<const Eigen::MatrixXd>& x_;
  KernelSpec kernel_;
  std::size_t capacity_;
  std::list<std::pair<Eigen::Index, Eigen::VectorXd>> lru_;
  std::unordered_map<Eigen::Index, decltype(lru_)::iterator> index_;
};

}  // namespace

SvrModel svr_train(const Eigen::Ref<const Eigen::MatrixXd>& instances,
                   std::span<const double> labels, const SvrConfig& config) {
  config.validate();
  const Eigen::Index n = instances.rows();
  require(n >= 2, ErrorCode::kInvalidInput, "SVR needs at least two instances");
  require(static_cast<Eigen::Index>(labels.size()) == n, ErrorCode::kDimensionMismatch,
          "one label per instance required");
  require(instances.allFinite(), ErrorCode::kInvalidInput, "non-finite features");
  for (double y : labels) require(std::isfinite(y), ErrorCode::kInvalidInput, "non-finite label");

  // Variables t < n are alpha (sign +1), t >= n are alpha* (sign -1).
  const Eigen::Index l = 2 * n;
  const double C = config.C;
  auto sign = [n](Eigen::Index t) { return t < n ? 1.0 : -1.0; };
  auto base = [n](Eigen::Index t) { return t < n ? t : t - n; };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(l);
  Eigen::VectorXd p(l);
  for (Eigen::Index t = 0; t < n; ++t) {
    p[t] = config.epsilon - labels[t];
    p[t + n] = config.epsilon + labels[t];
  }
  Eigen::VectorXd grad = p;
  auto upper = [&](Eigen::Index t) { return beta[t] >= C; };
  auto lower = [&](Eigen::Index t) { return beta[t] <= 0.0; };
  auto primal = [&] { return 0.5 * beta.dot(grad + p); };

  KernelRows rows(instances, config.kernel, config.cache_mb);
  SvrModel model;
  model.config = config;
  const std::int64_t max_iter = std::max<std::int64_t>(10000000, 100 * l);

  for (; model.iterations < max_iter; ++model.iterations) {
    // i: maximal violating index in I_up.
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < l; ++t) {
      if (sign(t) > 0 ? !upper(t) : !lower(t)) {
        const double v = -sign(t) * grad[t];
        if (v >= gmax) {
          gmax = v;
          i = t;
        }
      }
    }
    if (i < 0) break;
    const Eigen::VectorXd& ki = rows.row(base(i));

    // j: second-order choice among I_low.
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    for (Eigen::Index t = 0; t < l; ++t) {
      if (sign(t) > 0 ? lower(t) : upper(t)) continue;
      const double v = sign(t) * grad[t];
      gmax2 = std::max(gmax2, v);
      const double diff = gmax + v;
      if (diff > 0.0) {
        double a = 2.0 - 2.0 * ki[base(t)];  // K(i,i) = K(t,t) = 1 for the Gaussian kernel
        if (a <= 0.0) a = kTau;
        const double obj = -(diff * diff) / a;
        if (obj <= best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }
    if (gmax + gmax2 < config.tol || j < 0) break;
    const Eigen::VectorXd& kj = rows.row(base(j));
    const double kij = ki[base(j)];
    const double qij = sign(i) * sign(j) * kij;

    const double old_i = beta[i];
    const double old_j = beta[j];
    if (sign(i) != sign(j)) {
      double quad = 2.0 + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = beta[i] - beta[j];
      beta[i] += delta;
      beta[j] += delta;
      if (diff > 0.0) {
        if (beta[j] < 0.0) {
          beta[j] = 0.0;
          beta[i] = diff;
        }
      } else if (beta[i] < 0.0) {
        beta[i] = 0.0;
        beta[j] = -diff;
      }
      if (diff > 0.0) {
        if (beta[i] > C) {
          beta[i] = C;
          beta[j] = C - diff;
        }
      } else if (beta[j] > C) {
        beta[j] = C;
        beta[i] = C + diff;
      }
    } else {
      double quad = 2.0 - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = beta[i] + beta[j];
      beta[i] -= delta;
      beta[j] += delta;
      if (sum > C) {
        if (beta[i] > C) {
          beta[i] = C;
          beta[j] = sum - C;
        }
      } else if (beta[j] < 0.0) {
        beta[j] = 0.0;
        beta[i] = sum;
      }
      if (sum > C) {
        if (beta[j] > C) {
          beta[j] = C;
          beta[i] = sum - C;
        }
      } else if (beta[i] < 0.0) {
        beta[i] = 0.0;
        beta[j] = sum;
      }
    }

    const double di = beta[i] - old_i;
    const double dj = beta[j] - old_j;
    for (Eigen::Index t = 0; t < l; ++t)
      grad[t] += sign(t) * (sign(i) * ki[base(t)] * di + sign(j) * kj[base(t)] * dj);
    if (config.record_objective) model.objective_trace.push_back(-primal());
  }

  // Bias from the KKT conditions (libsvm's rho, negated).
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  int n_free = 0;
  for (Eigen::Index t = 0; t < l; ++t) {
    const double yg = sign(t) * grad[t];
    if (upper(t)) {
      if (sign(t) < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (sign(t) > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
  model.bias = -rho;
  model.dual_objective = -primal();

  std::vector<Eigen::Index> support;
  for (Eigen::Index t = 0; t < n; ++t)
    if (beta[t] - beta[t + n] != 0.0) support.push_back(t);
  model.support_vectors.resize(static_cast<Eigen::Index>(support.size()), instances.cols());
  model.coefficients.resize(static_cast<Eigen::Index>(support.size()));
  for (std::size_t s = 0; s < support.size(); ++s) {
    model.support_vectors.row(static_cast<Eigen::Index>(s)) = instances.row(support[s]);
    model.coefficients[static_cast<Eigen::Index>(s)] = beta[support[s]] - beta[support[s] + n];
  }
  if (model.support_vectors.cols() == 0) model.support_vectors.resize(0, instances.cols());
  return model;
}

double svr_predict(const SvrModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  require(x.size() == model.dim(), ErrorCode::kDimensionMismatch,
          "query has dimension " + std::to_string(x.size()) + ", model expects " +
              std::to_string(model.dim()));
  double f = model.bias;
  for (Eigen::Index s = 0; s < model.support_vectors.rows(); ++s)
    f += model.coefficients[s] * model.config.kernel(model.support_vectors.row(s), x);
  return f;
}

Eigen::VectorXd svr_predict_rows(const SvrModel& model, const Eigen::Ref<const Eigen::MatrixXd>& rows) {
  Eigen::VectorXd out(rows.rows());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) out[r] = svr_predict(model, rows.row(r));
  return out;
}

double svr_dual_objective(const Eigen::Ref<const Eigen::MatrixXd>& instances,
                          std::span<const double> labels, const SvrConfig& config,
                          const Eigen::VectorXd& alpha, const Eigen::VectorXd& alpha_star) {
  const Eigen::Index n = instances.rows();
  const Eigen::VectorXd c = alpha - alpha_star;
  double quad = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      quad += c[i] * c[j] * config.kernel(instances.row(i), instances.row(j));
  double lin = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    lin += labels[i] * c[i] - config.epsilon * (alpha[i] + alpha_star[i]);
  return -0.5 * quad + lin;
}

namespace {
constexpr char kSvrMagic[4] = {'E', 'S', 'V', 'R'};
constexpr std::uint32_t kSvrVersion = 1;
}  // namespace

void save_svr(const fs::path& path, const SvrModel& model, features::FeatureKind kind) {
  {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
    out.write(kSvrMagic, 4);
    binary::put_u32(out, kSvrVersion);
    binary::put_u32(out, static_cast<std::uint32_t>(model.support_vectors.rows()));
    binary::put_u32(out, static_cast<std::uint32_t>(model.support_vectors.cols()));
    for (double v : {model.config.C, model.config.epsilon, model.config.kernel.sigma,
                     model.config.tol, model.bias})
      binary::put_f64(out, v);
    for (Eigen::Index s = 0; s < model.support_vectors.rows(); ++s)
      for (Eigen::Index d = 0; d < model.support_vectors.cols(); ++d)
        binary::put_f32(out, static_cast<float>(model.support_vectors(s, d)));
    for (Eigen::Index s = 0; s < model.coefficients.size(); ++s)
      binary::put_f64(out, model.coefficients[s]);
  }
  const nlohmann::json side = {{"model", "svr"},
                               {"feature_kind", features::to_string(kind)},
                               {"dim", model.support_vectors.cols()},
                               {"n_support", model.support_vectors.rows()},
                               {"C", model.config.C},
                               {"epsilon", model.config.epsilon},
                               {"sigma", model.config.kernel.sigma}};
  std::ofstream out(fs::path(path.string() + ".json"));
  require(out.good(), ErrorCode::kIo, "cannot write sidecar for " + path.string());
  out << side.dump(2) << '\n';
}

SvrModel load_svr(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  char magic[4];
  std::uint32_t version = 0, n_sv = 0, dim = 0;
  require(static_cast<bool>(in.read(magic, 4)) && std::memcmp(magic, kSvrMagic, 4) == 0,
          ErrorCode::kParseError, path.string() + ": not an SVR model file");
  require(binary::get_u32(in, version) && version == kSvrVersion, ErrorCode::kParseError,
          path.string() + ": unsupported SVR model version");
  require(binary::get_u32(in, n_sv) && binary::get_u32(in, dim), ErrorCode::kParseError,
          path.string() + ": truncated header");
  SvrModel m;
  bool ok = binary::get_f64(in, m.config.C) && binary::get_f64(in, m.config.epsilon) &&
            binary::get_f64(in, m.config.kernel.sigma) && binary::get_f64(in, m.config.tol) &&
            binary::get_f64(in, m.bias);
  m.support_vectors.resize(n_sv, dim);
  m.coefficients.resize(n_sv);
  for (std::uint32_t s = 0; ok && s < n_sv; ++s)
    for (std::uint32_t d = 0; ok && d < dim; ++d) {
      float v = 0.0f;
      ok = binary::get_f32(in, v);
      m.support_vectors(s, d) = v;
    }
  for (std::uint32_t s = 0; ok && s < n_sv; ++s) ok = binary::get_f64(in, m.coefficients[s]);
  require(ok, ErrorCode::kParseError, path.string() + ": truncated SVR model");
  return m;
}

}  // namespace engage::baselines
