#include "dre/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dre::ad {
namespace {

struct Sample {
  double loss;
  std::vector<std::size_t> branch;
};

Sample evaluate(const LossBuilder& build_loss, const ParameterSet<double>& params) {
  Graph<double> graph(&params, kernels::Exec::serial);
  const double loss = graph.value(build_loss(graph))[0];
  return {loss, graph.branch_signature()};
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& build_loss, ParameterSet<double>& params,
                           const GradCheckOptions& options) {
  GradientSet<double> analytic(params);
  std::vector<std::size_t> base_branch;
  {
    Graph<double> graph(&params, kernels::Exec::serial);
    Var loss = build_loss(graph);
    graph.backward(loss);
    graph.accumulate_parameter_grads(analytic);
    base_branch = graph.branch_signature();
  }

  Rng rng(options.seed);
  GradCheckResult result;
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto values = params[p].data();
    std::vector<std::size_t> coords(values.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords_per_param != 0 && coords.size() > options.max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_param);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t j : coords) {
      const double saved = values[j];
      double h = options.epsilon;
      double numeric = 0.0;
      while (true) {
        bool same_piece = true;
        auto at = [&](double offset) {
          values[j] = saved + offset;
          Sample s = evaluate(build_loss, params);
          same_piece = same_piece && s.branch == base_branch;
          return s.loss;
        };
        const double f2 = at(2 * h);
        const double f1 = at(h);
        const double b1 = at(-h);
        const double b2 = at(-2 * h);
        numeric = (-f2 + 8.0 * f1 - 8.0 * b1 + b2) / (12.0 * h);
        if (same_piece || h <= options.min_epsilon) break;
        h /= 10.0;
        ++result.steps_reduced;
      }
      values[j] = saved;

      const double exact = analytic[p][j];
      const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
      const double err = std::abs(exact - numeric) / denom;
      ++result.coordinates_checked;
      if (err > result.max_relative_error || result.worst_parameter.empty()) {
        result.max_relative_error = err;
        result.worst_parameter = params.name(p);
        result.worst_index = j;
      }
    }
  }
  return result;
}

}  // namespace dre::ad
