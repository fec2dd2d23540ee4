#pragma once

#include <filesystem>
#include <variant>

#include "engage_mil/deepmil/nets.hpp"
#include "engage_mil/features/segment_feature.hpp"

namespace engage::deepmil {

// Binary "EMNN" file (version, architecture kind, shaped float64 blocks) plus
// a JSON sidecar at <path>.json describing layers, pooling and feature kind.
void save_net(const std::filesystem::path& path, const MilNet& net, features::FeatureKind kind);
void save_net(const std::filesystem::path& path, const SeqNet& net, features::FeatureKind kind);

struct LoadedNet {
  std::variant<MilNet, SeqNet> net;
  features::FeatureKind kind = features::FeatureKind::kPoseGaze;
};

LoadedNet load_net(const std::filesystem::path& path);

}  // namespace engage::deepmil
