#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "engage_mil/features/frames.hpp"

namespace engage::features {

enum class FeatureKind { kLbpTop, kPoseGaze };

std::string_view to_string(FeatureKind kind);
std::optional<FeatureKind> parse_feature_kind(std::string_view name);

struct SegmentFeature {
  std::vector<double> vector;
  FeatureKind kind = FeatureKind::kPoseGaze;
  SegmentWindow window;
};

}  // namespace engage::features
