#include "pressmap/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "pressmap/error.hpp"
#include "pressmap/parallel.hpp"
#include "pressmap/rng.hpp"
#include "pressmap/text.hpp"

namespace pressmap {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || batch_size == 0 || epochs <= 0 || hidden <= 0) {
    throw ValidationError("training hyperparameters must be positive");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ValidationError("train fraction must lie in (0, 1)");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("dropout must lie in [0, 1)");
}

namespace {

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, std::size_t size)
      : kind_(kind), lr_(lr), first_(size, 0.0), second_(kind == OptimizerKind::adam ? size : 0, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad) {
    ++t_;
    if (kind_ == OptimizerKind::sgd_momentum) {
      constexpr double kMomentum = 0.9;
      for (std::size_t i = 0; i < params.size(); ++i) {
        first_[i] = kMomentum * first_[i] + grad[i];
        params[i] -= lr_ * first_[i];
      }
      return;
    }
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      first_[i] = kBeta1 * first_[i] + (1.0 - kBeta1) * grad[i];
      second_[i] = kBeta2 * second_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      params[i] -= lr_ * (first_[i] / c1) / (std::sqrt(second_[i] / c2) + kEps);
    }
  }

 private:
  OptimizerKind kind_;
  double lr_;
  std::vector<double> first_;
  std::vector<double> second_;
  std::uint64_t t_ = 0;
};

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[static_cast<std::size_t>(rng.below(i))]);
  }
}

int predicted_label(const Prediction& p) { return p.p_keep >= p.p_lose ? kLabelKeep : kLabelLose; }

// Splits example indices into (train, validation) by group.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_groups(std::span<const Example> data,
                                                                           double train_fraction, std::uint64_t seed) {
  std::vector<std::string> groups;
  std::map<std::string, std::size_t> group_index;
  for (const auto& ex : data) {
    if (group_index.emplace(ex.group, groups.size()).second) groups.push_back(ex.group);
  }
  std::vector<std::size_t> train_idx, val_idx;
  Rng rng(seed);
  if (groups.size() >= 2) {
    std::vector<std::size_t> order(groups.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(groups.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, groups.size() - 1);
    std::vector<bool> is_train(groups.size(), false);
    for (std::size_t i = 0; i < n_train; ++i) is_train[order[i]] = true;
    for (std::size_t i = 0; i < data.size(); ++i) (is_train[group_index[data[i].group]] ? train_idx : val_idx).push_back(i);
  } else {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(data.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, data.size() - 1);
    train_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    val_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
  }
  return {train_idx, val_idx};
}

Evaluation evaluate_indices(const PopModel& model, std::span<const Example> data, const std::vector<std::size_t>& idx,
                            unsigned jobs) {
  Evaluation ev;
  if (idx.empty()) return ev;
  std::vector<Prediction> preds(idx.size());
  parallel_for(idx.size(), jobs, [&](std::size_t i) { preds[i] = forward(model, data[idx[i]].input, Mode::eval); });
  double total_loss = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const int truth = data[idx[i]].label;
    const int guess = predicted_label(preds[i]);
    ev.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(guess)] += 1;
    total_loss += loss(preds[i], truth);
  }
  ev.total = idx.size();
  ev.accuracy = static_cast<double>(ev.confusion[0][0] + ev.confusion[1][1]) / static_cast<double>(ev.total);
  ev.mean_loss = total_loss / static_cast<double>(ev.total);
  return ev;
}

}  // namespace

TrainResult train(std::span<const Example> dataset, const TrainConfig& config, PpmVariant variant) {
  config.validate();
  std::array<std::size_t, 2> per_class{};
  for (const auto& ex : dataset) {
    if (ex.label != kLabelKeep && ex.label != kLabelLose) throw TrainingError("labels must be 0 or 1");
    per_class[static_cast<std::size_t>(ex.label)] += 1;
  }
  if (per_class[0] < 2 || per_class[1] < 2) {
    throw TrainingError("training needs at least 2 examples of each class (lose " + std::to_string(per_class[0]) +
                        ", keep " + std::to_string(per_class[1]) + ")");
  }

  auto [train_idx, val_idx] = split_groups(dataset, config.train_fraction, Rng::mix(config.seed, 1));

  ModelDims dims;
  dims.node_dim = static_cast<int>(dataset.front().input.nodes.cols());
  dims.edge_dim = static_cast<int>(dataset.front().input.edge_mean.cols());
  dims.hidden = config.hidden;
  PopModel model = PopModel::initialized(dims, Rng::mix(config.seed, 2), config.dropout, variant);

  const std::size_t n_params = model.parameters().size();
  Optimizer optimizer(config.optimizer, config.learning_rate, n_params);

  TrainResult result{model, {}, 0, -1.0};
  std::vector<std::vector<double>> example_grads(config.batch_size, std::vector<double>(n_params));
  std::vector<double> batch_grad(n_params);
  std::vector<ForwardCache> caches(config.batch_size);
  std::vector<Prediction> preds(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng order_rng(Rng::mix(config.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    std::vector<std::size_t> order = train_idx;
    shuffle(order, order_rng);

    double epoch_loss = 0.0;
    std::size_t correct = 0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_no) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      parallel_for(count, config.jobs, [&](std::size_t i) {
        const std::size_t position = start + i;
        const Example& ex = dataset[order[position]];
        const std::uint64_t dropout_seed =
            Rng::mix(config.seed, (static_cast<std::uint64_t>(epoch) << 32) ^ static_cast<std::uint64_t>(position));
        preds[i] = forward(model, ex.input, Mode::train, dropout_seed, &caches[i]);
        std::fill(example_grads[i].begin(), example_grads[i].end(), 0.0);
        backward(model, caches[i], ex.label, example_grads[i]);
      });

      std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
      for (std::size_t i = 0; i < count; ++i) {
        const Example& ex = dataset[order[start + i]];
        const double l = loss(preds[i], ex.label);
        if (!std::isfinite(l)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(batch_no));
        }
        epoch_loss += l;
        correct += predicted_label(preds[i]) == ex.label;
        for (std::size_t k = 0; k < n_params; ++k) batch_grad[k] += example_grads[i][k];
      }
      const double inv = 1.0 / static_cast<double>(count);
      for (auto& g : batch_grad) g *= inv;
      optimizer.step(model.mutable_parameters(), batch_grad);
    }

    const double n_train = static_cast<double>(order.size());
    result.history.push_back({epoch, "train", epoch_loss / n_train, static_cast<double>(correct) / n_train});
    const Evaluation val = evaluate_indices(model, dataset, val_idx, config.jobs);
    result.history.push_back({epoch, "validation", val.mean_loss, val.accuracy});
    if (val.accuracy > result.best_validation_accuracy) {
      result.best_validation_accuracy = val.accuracy;
      result.best_epoch = epoch;
      result.model = model;
    }
  }
  return result;
}

Evaluation evaluate(const PopModel& model, std::span<const Example> examples, unsigned jobs) {
  if (examples.empty()) throw ValidationError("cannot evaluate on an empty set");
  std::vector<std::size_t> idx(examples.size());
  std::iota(idx.begin(), idx.end(), 0);
  return evaluate_indices(model, examples, idx, jobs);
}

Prediction predict_pop(const PopModel& model, const PpmSequence& sequence) {
  for (const auto& g : sequence.graphs) {
    if (g.variant != model.variant()) {
      throw ValidationError("sequence variant " + std::string(to_string(g.variant)) + " does not match model variant " +
                            std::string(to_string(model.variant())));
    }
  }
  return forward(model, pack(sequence), Mode::eval);
}

void write_metrics(std::ostream& out, const std::vector<EpochMetrics>& history) {
  out << "epoch,split,loss,accuracy\n";
  for (const auto& m : history) {
    out << m.epoch << ',' << m.split << ',' << text::format_double(m.loss) << ',' << text::format_double(m.accuracy)
        << '\n';
  }
}

}  // namespace pressmap
