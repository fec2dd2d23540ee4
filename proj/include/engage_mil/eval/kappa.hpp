#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <span>
#include <vector>

namespace engage::eval {

// Quadratic-weighted Cohen's kappa over levels 0..num_levels-1.
// Both raters constant and equal gives 1; other zero-expectation cases throw
// degenerate-marginals.
double quadratic_weighted_kappa(std::span<const int> a, std::span<const int> b, int num_levels = 4);

// Rows are videos, columns are raters; nullopt marks a missing rating.
struct AnnotationMatrix {
  std::vector<std::vector<std::optional<int>>> ratings;
  std::vector<std::string> video_ids;  // optional, same length as ratings when present
  std::vector<std::string> rater_names;

  std::size_t videos() const { return ratings.size(); }
  std::size_t raters() const { return ratings.empty() ? rater_names.size() : ratings.front().size(); }
  void validate(int num_levels = 4) const;
};

// CSV: header "video_id,<rater>,<rater>..." then one row per video; blank = missing.
AnnotationMatrix read_annotations_csv(const std::filesystem::path& path);

struct FusionResult {
  std::vector<int> labels;            // per video; -1 when no reliable rater rated it
  std::vector<double> reliability;    // mean pairwise kappa per rater
  std::vector<std::size_t> dropped;   // rater indices below threshold
};

// Pairwise kappa over jointly observed videos; round half away from zero.
FusionResult fuse_labels(const AnnotationMatrix& annotations, double reliability_threshold = 0.4);

}  // namespace engage::eval
