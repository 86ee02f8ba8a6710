#pragma once

#include "mma/rng.hpp"
#include "mma/tensor.hpp"

namespace mma {

enum class InitScheme { glorot, he };

// Glorot-uniform: samples in +-sqrt(6 / (fan_in + fan_out)).
// He-uniform:     samples in +-sqrt(6 / fan_in).
// Shape is (fan_in, fan_out) as stated; callers reshape as needed.
Tensor xavier_init(int fan_in, int fan_out, RngStream& rng,
                   InitScheme scheme = InitScheme::glorot);

// Same bounds, arbitrary shape: for [out x in]-stored weight matrices whose
// fans differ from their storage order.
Tensor init_weight(std::vector<int> shape, int fan_in, int fan_out, RngStream& rng,
                   InitScheme scheme = InitScheme::glorot);

}  // namespace mma
