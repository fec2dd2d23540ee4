#pragma once

#include <cstdint>
#include <vector>

#include "engage_mil/deepmil/nets.hpp"
#include "engage_mil/error.hpp"
#include "engage_mil/weakdata/dataset.hpp"

namespace engage::deepmil {

struct TrainConfig {
  double step = 0.01;
  int epochs = 300;
  int batch_size = 1;  // bags per update
  std::uint64_t seed = 0;
  bool label_scaling = true;
  double clip_norm = 5.0;  // global gradient norm; <= 0 disables
  double momentum = 0.0;   // heavy-ball term, 0 = plain SGD

  void validate() const;
};

template <class Net>
struct TrainResult {
  Net net;
  std::vector<double> loss_trace;  // mean per-bag loss of each epoch, training units
};

// Thrown when an epoch's loss is not finite; carries the trace so far.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, std::vector<double> trace)
      : Error(ErrorCode::kTrainingDiverged, what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

// Minibatch SGD on mil_loss with per-epoch shuffling from config.seed.
TrainResult<MilNet> train(MilNet net, const weakdata::Dataset& data, const TrainConfig& config);
TrainResult<SeqNet> train(SeqNet net, const weakdata::Dataset& data, const TrainConfig& config);

}  // namespace engage::deepmil
