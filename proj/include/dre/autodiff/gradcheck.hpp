#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "dre/autodiff/graph.hpp"

namespace dre::ad {

// Five-point central differences,
//   (-f(x+2h) + 8 f(x+h) - 8 f(x-h) + f(x-2h)) / 12h,
// have O(h^4) truncation error, which allows a step large enough that
// round-off stays small next to gradients of order 1e-8. When a perturbed
// point selects a different max-pooling row than the unperturbed one, the
// stencil straddles a kink and h shrinks tenfold, down to min_epsilon.
struct GradCheckOptions {
  double epsilon = 1e-3;
  double min_epsilon = 1e-7;
  // Coordinates sampled per parameter tensor; 0 checks every coordinate.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  std::size_t coordinates_checked = 0;
  // Times a step was shrunk to stay on one side of a kink.
  std::size_t steps_reduced = 0;
};

// Builds the scalar loss over the given graph. Must be deterministic: it is
// called once for the analytic gradient and at least four times per checked
// coordinate.
using LossBuilder = std::function<Var(Graph<double>&)>;

// Compares reverse-mode gradients with the numeric estimate. The error for
// one coordinate is |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
GradCheckResult grad_check(const LossBuilder& build_loss, ParameterSet<double>& params,
                           const GradCheckOptions& options = {});

}  // namespace dre::ad
