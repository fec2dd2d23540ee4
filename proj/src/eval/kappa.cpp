#include "engage_mil/eval/kappa.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "engage_mil/csv.hpp"
#include "engage_mil/error.hpp"

namespace engage::eval {

double quadratic_weighted_kappa(std::span<const int> a, std::span<const int> b, int num_levels) {
  require(num_levels >= 2, ErrorCode::kInvalidArgument, "kappa needs at least two levels");
  require(a.size() == b.size(), ErrorCode::kDimensionMismatch, "kappa inputs differ in length");
  require(!a.empty(), ErrorCode::kInvalidInput, "kappa needs at least one paired label");
  const auto L = static_cast<std::size_t>(num_levels);
  std::vector<double> observed(L * L, 0.0), row(L, 0.0), col(L, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    require(a[i] >= 0 && a[i] < num_levels && b[i] >= 0 && b[i] < num_levels,
            ErrorCode::kInvalidInput, "label out of range");
    observed[a[i] * L + b[i]] += 1.0;
    row[a[i]] += 1.0;
    col[b[i]] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  const double denom = static_cast<double>((L - 1) * (L - 1));
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = 0; j < L; ++j) {
      const double d = static_cast<double>(i) - static_cast<double>(j);
      const double w = d * d / denom;
      num += w * observed[i * L + j] / n;
      den += w * (row[i] / n) * (col[j] / n);
    }
  if (den == 0.0) {
    require(num == 0.0, ErrorCode::kDegenerateMarginals, "expected disagreement is zero");
    return 1.0;
  }
  return 1.0 - num / den;
}

void AnnotationMatrix::validate(int num_levels) const {
  require(raters() >= 2, ErrorCode::kInvalidInput, "at least two raters are required");
  require(video_ids.empty() || video_ids.size() == ratings.size(), ErrorCode::kInvalidInput,
          "video id count does not match ratings");
  for (const auto& r : ratings) {
    require(r.size() == raters(), ErrorCode::kInvalidInput, "ragged annotation matrix");
    for (const auto& v : r)
      require(!v || (*v >= 0 && *v < num_levels), ErrorCode::kInvalidInput,
              "annotation out of range");
  }
}

AnnotationMatrix read_annotations_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kParseError,
          path.string() + ":1: missing header");
  AnnotationMatrix m;
  auto header = csv::split(line);
  require(header.size() >= 3, ErrorCode::kParseError,
          path.string() + ":1: expected video_id and at least two rater columns");
  m.rater_names.assign(header.begin() + 1, header.end());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto cells = csv::split(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    require(cells.size() == header.size(), ErrorCode::kParseError,
            where + ": expected " + std::to_string(header.size()) + " columns");
    m.video_ids.push_back(cells[0]);
    std::vector<std::optional<int>> row;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c].empty()) {
        row.emplace_back();
        continue;
      }
      int v = 0;
      const auto [ptr, ec] = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
      require(ec == std::errc() && ptr == cells[c].data() + cells[c].size() && v >= 0 && v <= 3,
              ErrorCode::kParseError, where + ": bad rating '" + cells[c] + "'");
      row.emplace_back(v);
    }
    m.ratings.push_back(std::move(row));
  }
  return m;
}

FusionResult fuse_labels(const AnnotationMatrix& annotations, double reliability_threshold) {
  annotations.validate();
  const std::size_t R = annotations.raters();
  FusionResult out;
  out.reliability.assign(R, 0.0);
  std::vector<int> pairs(R, 0);
  for (std::size_t p = 0; p < R; ++p)
    for (std::size_t q = p + 1; q < R; ++q) {
      std::vector<int> a, b;
      for (const auto& row : annotations.ratings)
        if (row[p] && row[q]) {
          a.push_back(*row[p]);
          b.push_back(*row[q]);
        }
      if (a.empty()) continue;
      const double k = quadratic_weighted_kappa(a, b);
      out.reliability[p] += k;
      out.reliability[q] += k;
      ++pairs[p];
      ++pairs[q];
    }
  std::vector<bool> keep(R);
  for (std::size_t r = 0; r < R; ++r) {
    // A rater sharing no video with anyone cannot be assessed and is dropped.
    out.reliability[r] = pairs[r] > 0 ? out.reliability[r] / pairs[r] : std::nan("");
    keep[r] = pairs[r] > 0 && out.reliability[r] >= reliability_threshold;
    if (!keep[r]) out.dropped.push_back(r);
  }
  require(out.dropped.size() < R, ErrorCode::kNoReliableRaters,
          "every rater fell below the reliability threshold");
  for (const auto& row : annotations.ratings) {
    double sum = 0.0;
    int n = 0;
    for (std::size_t r = 0; r < R; ++r)
      if (keep[r] && row[r]) {
        sum += *row[r];
        ++n;
      }
    out.labels.push_back(n > 0 ? static_cast<int>(std::round(sum / n)) : -1);
  }
  return out;
}

}  // namespace engage::eval
