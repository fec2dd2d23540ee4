#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>

#include "json.hpp"

namespace engage::eval {

inline constexpr int kNumClasses = 4;

double mse(std::span<const double> pred, std::span<const double> truth);

struct ClasswiseMse {
  std::array<std::optional<double>, kNumClasses> mse;  // nullopt when the class is absent
  std::array<std::size_t, kNumClasses> count{};
};

// Truth values are rounded to the nearest level to pick the class.
ClasswiseMse classwise_mse(std::span<const double> pred, std::span<const double> truth);

// Sample Pearson correlation; throws undefined-correlation on constant input.
double pcc(std::span<const double> pred, std::span<const double> truth);

struct MetricsReport {
  double mse = 0.0;
  ClasswiseMse classwise;
  std::optional<double> pcc;  // absent when either side is constant
  std::size_t n = 0;
};

MetricsReport evaluate(std::span<const double> pred, std::span<const double> truth);
nlohmann::json to_json(const MetricsReport& report);

}  // namespace engage::eval
