#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pressmap/gnn.hpp"

namespace pressmap {

enum class OptimizerKind { sgd_momentum, adam };

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  int epochs = 30;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::adam;
  /// Share of the groups used for fitting; the rest selects the snapshot.
  double train_fraction = 0.8;
  int hidden = 32;
  double dropout = 0.5;
  unsigned jobs = 1;

  void validate() const;
};

/// One labelled training example. Examples sharing a group (a possession)
/// always land on the same side of the train/validation split.
struct Example {
  SequenceInput input;
  int label = kLabelKeep;
  std::string group;
};

struct EpochMetrics {
  int epoch = 0;
  std::string split;  // "train" or "validation"
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  PopModel model;
  std::vector<EpochMetrics> history;
  int best_epoch = 0;
  double best_validation_accuracy = 0.0;
};

/// Mini-batch training with deterministic shuffling and dropout masks
/// derived from the seed. Gradients of a batch are summed in example order
/// regardless of `jobs`, so results are bit-identical across thread counts.
/// Returns the snapshot with the best validation accuracy.
/// Throws TrainingError on a single-class dataset or a non-finite loss.
TrainResult train(std::span<const Example> dataset, const TrainConfig& config, PpmVariant variant);

struct Evaluation {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  /// confusion[truth][predicted]
  std::array<std::array<std::size_t, 2>, 2> confusion{};
  std::size_t total = 0;
};

/// Argmax decision with ties going to "kept". Throws ValidationError on an
/// empty set.
Evaluation evaluate(const PopModel& model, std::span<const Example> examples, unsigned jobs = 1);

/// Eval-mode prediction; throws ValidationError if the sequence was built
/// for a different variant than the model was trained on.
Prediction predict_pop(const PopModel& model, const PpmSequence& sequence);

/// CSV `epoch,split,loss,accuracy`.
void write_metrics(std::ostream& out, const std::vector<EpochMetrics>& history);

/// Binary checkpoint: "POPM1", little-endian u32 dims (node, edge, hidden,
/// layers, classes), u8 variant, f64 dropout, u64 parameter count, then the
/// parameters as little-endian f64 in declared row-major order.
void save_checkpoint(std::ostream& out, const PopModel& model);
PopModel load_checkpoint(std::istream& in);

}  // namespace pressmap
