#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pressmap/gnn.hpp"

namespace pressmap {

struct BlockCheck {
  std::string name;
  std::size_t parameters = 0;
  double max_relative_error = 0.0;
};

struct GradCheckReport {
  std::vector<BlockCheck> blocks;
  double max_relative_error = 0.0;
};

/// Gradients below this magnitude are compared absolutely.
inline constexpr double kGradCheckFloor = 1e-7;

/// Compares backward() with central differences of the train-mode loss for
/// every parameter. The dropout mask is fixed by `seed`, so both sides see
/// the same function. Relative error is |a - n| / max(|a|, |n|, floor).
GradCheckReport gradient_check(const PopModel& model, const SequenceInput& input, int label, std::uint64_t seed = 0,
                               double step = 1e-6);

/// A 3-node toy graph sequence (complete or a directed path when
/// `complete` is false) with random features of the given dims.
SequenceInput toy_sequence(const ModelDims& dims, int num_graphs, bool complete, std::uint64_t seed);

}  // namespace pressmap
