#include "engage_mil/deepmil/net_io.hpp"

#include <cstring>
#include <fstream>

#include "engage_mil/binary_io.hpp"
#include "engage_mil/error.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace engage::deepmil {
namespace {

constexpr char kMagic[4] = {'E', 'M', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;
enum : std::uint32_t { kArchMil = 0, kArchSeq = 1 };

// Architecture descriptor shared by both nets; fields a net does not use are 0.
struct Header {
  std::uint32_t arch = kArchMil;
  std::uint32_t feature_kind = 0;
  std::uint32_t label_scaling = 1;
  std::uint32_t pooling = 0;
  std::uint32_t k = 0;
  std::uint32_t M = 0;
  std::vector<std::uint32_t> activations;  // one per dense stage
};

std::uint32_t code(Activation a) { return static_cast<std::uint32_t>(a); }
std::uint32_t code(features::FeatureKind k) { return static_cast<std::uint32_t>(k); }

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  binary::put_u32(out, static_cast<std::uint32_t>(m.rows()));
  binary::put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) binary::put_f64(out, m(r, c));
}

Eigen::MatrixXd get_matrix(std::istream& in, const std::string& where) {
  std::uint32_t rows = 0, cols = 0;
  require(binary::get_u32(in, rows) && binary::get_u32(in, cols), ErrorCode::kParseError,
          where + ": truncated parameter block");
  require(std::uint64_t{rows} * cols < (std::uint64_t{1} << 28), ErrorCode::kParseError,
          where + ": implausible block shape");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      require(binary::get_f64(in, m(r, c)), ErrorCode::kParseError,
              where + ": truncated parameter block");
  return m;
}

void write_binary(const fs::path& path, const Header& h,
                  const std::vector<const Eigen::MatrixXd*>& blocks) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  out.write(kMagic, 4);
  binary::put_u32(out, kVersion);
  for (std::uint32_t v : {h.arch, h.feature_kind, h.label_scaling, h.pooling, h.k, h.M})
    binary::put_u32(out, v);
  binary::put_u32(out, static_cast<std::uint32_t>(h.activations.size()));
  for (std::uint32_t a : h.activations) binary::put_u32(out, a);
  binary::put_u32(out, static_cast<std::uint32_t>(blocks.size()));
  for (const Eigen::MatrixXd* m : blocks) put_matrix(out, *m);
  require(out.good(), ErrorCode::kIo, "write failed for " + path.string());
}

void write_sidecar(const fs::path& path, const nlohmann::json& side) {
  std::ofstream out(fs::path(path.string() + ".json"));
  require(out.good(), ErrorCode::kIo, "cannot write sidecar for " + path.string());
  out << side.dump(2) << '\n';
}

nlohmann::json dense_json(const std::vector<DenseLayer>& layers) {
  nlohmann::json arr = nlohmann::json::array();
  for (const DenseLayer& l : layers)
    arr.push_back({{"in", l.in()}, {"out", l.out()}, {"activation", to_string(l.activation)}});
  return arr;
}

Activation activation_from(std::uint32_t v, const std::string& where) {
  require(v <= code(Activation::kLinear), ErrorCode::kParseError, where + ": unknown activation");
  return static_cast<Activation>(v);
}

}  // namespace

void save_net(const fs::path& path, const MilNet& net, features::FeatureKind kind) {
  Header h;
  h.arch = kArchMil;
  h.feature_kind = code(kind);
  h.label_scaling = net.label_scaling ? 1 : 0;
  h.pooling = net.pooling.kind == PoolingKind::kTopK ? 0 : 1;
  h.k = static_cast<std::uint32_t>(net.pooling.k);
  std::vector<Eigen::MatrixXd> vectors;
  vectors.reserve(net.layers.size());
  std::vector<const Eigen::MatrixXd*> blocks;
  for (const DenseLayer& l : net.layers) {
    h.activations.push_back(code(l.activation));
    vectors.emplace_back(l.bias);
    blocks.push_back(&l.weights);
    blocks.push_back(&vectors.back());
  }
  write_binary(path, h, blocks);
  write_sidecar(path, {{"model", "milnet"},
                       {"feature_kind", features::to_string(kind)},
                       {"input_dim", net.input_dim()},
                       {"layers", dense_json(net.layers)},
                       {"pooling", net.pooling.kind == PoolingKind::kTopK ? "topk" : "mean"},
                       {"k", net.pooling.k},
                       {"label_scaling", net.label_scaling}});
}

void save_net(const fs::path& path, const SeqNet& net, features::FeatureKind kind) {
  Header h;
  h.arch = kArchSeq;
  h.feature_kind = code(kind);
  h.label_scaling = net.label_scaling ? 1 : 0;
  h.M = static_cast<std::uint32_t>(net.M);
  std::vector<Eigen::MatrixXd> vectors;
  vectors.reserve(net.head.size() + 1);
  vectors.emplace_back(net.lstm.bias);
  std::vector<const Eigen::MatrixXd*> blocks = {&net.lstm.weights, &vectors.back()};
  for (const DenseLayer& l : net.head) {
    h.activations.push_back(code(l.activation));
    vectors.emplace_back(l.bias);
    blocks.push_back(&l.weights);
    blocks.push_back(&vectors.back());
  }
  write_binary(path, h, blocks);
  write_sidecar(path, {{"model", "seqnet"},
                       {"feature_kind", features::to_string(kind)},
                       {"input_dim", net.input_dim()},
                       {"M", net.M},
                       {"lstm_hidden", net.lstm.hidden()},
                       {"layers", dense_json(net.head)},
                       {"label_scaling", net.label_scaling}});
}

LoadedNet load_net(const fs::path& path) {
  const std::string where = path.string();
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot open " + where);
  char magic[4];
  require(static_cast<bool>(in.read(magic, 4)) && std::memcmp(magic, kMagic, 4) == 0,
          ErrorCode::kParseError, where + ": not a network file");
  std::uint32_t version = 0;
  require(binary::get_u32(in, version) && version == kVersion, ErrorCode::kParseError,
          where + ": unsupported network file version");
  Header h;
  std::uint32_t n_act = 0, n_blocks = 0;
  bool ok = binary::get_u32(in, h.arch) && binary::get_u32(in, h.feature_kind) &&
            binary::get_u32(in, h.label_scaling) && binary::get_u32(in, h.pooling) &&
            binary::get_u32(in, h.k) && binary::get_u32(in, h.M) && binary::get_u32(in, n_act);
  require(ok && n_act < 1024, ErrorCode::kParseError, where + ": truncated header");
  h.activations.resize(n_act);
  for (std::uint32_t& a : h.activations) ok = ok && binary::get_u32(in, a);
  ok = ok && binary::get_u32(in, n_blocks);
  require(ok, ErrorCode::kParseError, where + ": truncated header");
  require(h.arch <= kArchSeq && h.feature_kind <= code(features::FeatureKind::kPoseGaze) &&
              h.pooling <= 1,
          ErrorCode::kParseError, where + ": invalid architecture descriptor");

  const std::uint32_t extra = h.arch == kArchSeq ? 2 : 0;
  require(n_blocks == 2 * n_act + extra && n_act >= 1, ErrorCode::kParseError,
          where + ": block count does not match architecture");
  std::vector<Eigen::MatrixXd> blocks;
  for (std::uint32_t b = 0; b < n_blocks; ++b) blocks.push_back(get_matrix(in, where));

  auto dense_stack = [&](std::uint32_t first) {
    std::vector<DenseLayer> layers;
    for (std::uint32_t i = 0; i < n_act; ++i) {
      DenseLayer l;
      l.weights = blocks[first + 2 * i];
      const Eigen::MatrixXd& bias = blocks[first + 2 * i + 1];
      require(bias.cols() == 1 && bias.rows() == l.weights.rows(), ErrorCode::kParseError,
              where + ": bias shape mismatch");
      require(i == 0 || l.weights.cols() == layers.back().weights.rows(), ErrorCode::kParseError,
              where + ": layer shapes do not chain");
      l.bias = bias.col(0);
      l.activation = activation_from(h.activations[i], where);
      layers.push_back(std::move(l));
    }
    return layers;
  };

  LoadedNet loaded;
  loaded.kind = static_cast<features::FeatureKind>(h.feature_kind);
  if (h.arch == kArchMil) {
    MilNet net;
    net.layers = dense_stack(0);
    require(net.layers.back().out() == 1, ErrorCode::kParseError,
            where + ": ranking stage must have one output");
    net.pooling.kind = h.pooling == 0 ? PoolingKind::kTopK : PoolingKind::kMean;
    net.pooling.k = static_cast<int>(h.k);
    net.label_scaling = h.label_scaling != 0;
    loaded.net = std::move(net);
  } else {
    SeqNet net;
    net.lstm.weights = blocks[0];
    require(blocks[1].cols() == 1 && blocks[1].rows() == net.lstm.weights.rows() &&
                net.lstm.weights.rows() % 4 == 0 && net.lstm.weights.cols() > net.lstm.hidden(),
            ErrorCode::kParseError, where + ": LSTM shape mismatch");
    net.lstm.bias = blocks[1].col(0);
    net.head = dense_stack(2);
    net.M = h.M;
    require(net.head.front().in() == net.M * net.lstm.hidden() && net.head.back().out() == net.M,
            ErrorCode::kParseError, where + ": head shape does not match M");
    net.label_scaling = h.label_scaling != 0;
    loaded.net = std::move(net);
  }
  return loaded;
}

}  // namespace engage::deepmil
