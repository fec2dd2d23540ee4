#include "engage_mil/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "engage_mil/error.hpp"

namespace engage::eval {
namespace {

void check_pair(std::span<const double> pred, std::span<const double> truth) {
  require(pred.size() == truth.size(), ErrorCode::kDimensionMismatch,
          "prediction and truth lengths differ");
  require(!pred.empty(), ErrorCode::kInvalidInput, "no samples");
}

}  // namespace

double mse(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth);
  double sse = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sse += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return sse / static_cast<double>(pred.size());
}

ClasswiseMse classwise_mse(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth);
  ClasswiseMse out;
  std::array<double, kNumClasses> sse{};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const long level = std::lround(truth[i]);
    require(level >= 0 && level < kNumClasses, ErrorCode::kInvalidInput,
            "truth value outside the label range");
    sse[level] += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    ++out.count[level];
  }
  for (int c = 0; c < kNumClasses; ++c)
    if (out.count[c] > 0) out.mse[c] = sse[c] / static_cast<double>(out.count[c]);
  return out;
}

double pcc(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth);
  require(pred.size() >= 2, ErrorCode::kInvalidInput, "correlation needs two samples");
  const double n = static_cast<double>(pred.size());
  double mp = 0.0, mt = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    mp += pred[i];
    mt += truth[i];
  }
  mp /= n;
  mt /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dp = pred[i] - mp, dt = truth[i] - mt;
    sxy += dp * dt;
    sxx += dp * dp;
    syy += dt * dt;
  }
  require(sxx > 0.0 && syy > 0.0, ErrorCode::kUndefinedCorrelation,
          "correlation is undefined for constant input");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

MetricsReport evaluate(std::span<const double> pred, std::span<const double> truth) {
  MetricsReport report;
  report.mse = mse(pred, truth);
  report.classwise = classwise_mse(pred, truth);
  report.n = pred.size();
  try {
    report.pcc = pcc(pred, truth);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUndefinedCorrelation && e.code() != ErrorCode::kInvalidInput) throw;
  }
  return report;
}

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json classwise = nlohmann::json::object();
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& v = report.classwise.mse[c];
    classwise[std::to_string(c)] = {{"mse", v ? nlohmann::json(*v) : nlohmann::json(nullptr)},
                                    {"count", report.classwise.count[c]}};
  }
  return {{"n", report.n},
          {"mse", report.mse},
          {"pcc", report.pcc ? nlohmann::json(*report.pcc) : nlohmann::json(nullptr)},
          {"classwise", classwise}};
}

}  // namespace engage::eval
