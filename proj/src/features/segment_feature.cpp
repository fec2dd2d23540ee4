#include "engage_mil/features/segment_feature.hpp"

namespace engage::features {

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kLbpTop: return "lbptop";
    case FeatureKind::kPoseGaze: return "posegaze";
  }
  return "unknown";
}

std::optional<FeatureKind> parse_feature_kind(std::string_view name) {
  if (name == "lbptop") return FeatureKind::kLbpTop;
  if (name == "posegaze") return FeatureKind::kPoseGaze;
  return std::nullopt;
}

}  // namespace engage::features
