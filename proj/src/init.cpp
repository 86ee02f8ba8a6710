#include "mma/init.hpp"

#include <cmath>

#include "mma/error.hpp"

namespace mma {

Tensor init_weight(std::vector<int> shape, int fan_in, int fan_out, RngStream& rng,
                   InitScheme scheme) {
    if (fan_in <= 0 || fan_out <= 0) {
        throw DimensionError("init_weight: fans must be positive");
    }
    const double bound = scheme == InitScheme::glorot
                             ? std::sqrt(6.0 / (fan_in + fan_out))
                             : std::sqrt(6.0 / fan_in);
    Tensor t = Tensor::zeros(std::move(shape), true);
    for (double& v : t.value()) v = rng.uniform(-bound, bound);
    return t;
}

Tensor xavier_init(int fan_in, int fan_out, RngStream& rng, InitScheme scheme) {
    return init_weight({fan_in, fan_out}, fan_in, fan_out, rng, scheme);
}

}  // namespace mma
