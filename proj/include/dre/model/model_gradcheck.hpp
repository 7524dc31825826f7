#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "dre/autodiff/gradcheck.hpp"
#include "dre/model/model.hpp"

namespace dre::model {

// A complete lookup-mode model in float64 scored on one short all-real
// sequence with dropout off.
struct GradCheckSetup {
  ModelConfig config;
  std::size_t sequence_length = 3;
  std::uint64_t seed = 1;
  ad::GradCheckOptions options;
};

// "tiny": k=8, H=4, 3 layers, T=3, 3 classes, every coordinate.
// "small": k=16, H=8, 3 layers, T=6, 3 classes, 64 coordinates per tensor.
GradCheckSetup gradcheck_setup(std::string_view dims, std::uint64_t seed = 1);

ad::GradCheckResult model_gradcheck(const GradCheckSetup& setup);

}  // namespace dre::model
