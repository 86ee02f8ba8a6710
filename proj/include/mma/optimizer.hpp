#pragma once

#include <cstdint>
#include <vector>

#include "mma/param_store.hpp"

namespace mma {

// Adaptive-moment first-order optimizer with bias correction.
// step() consumes the accumulated grads and zeroes them afterwards.
class AdamOptimizer {
public:
    struct Options {
        double lr = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
    };

    AdamOptimizer() : AdamOptimizer(Options{}) {}
    explicit AdamOptimizer(Options options) : opt_(options) {}

    // Throws NumericalError naming the parameter if any grad is non-finite.
    void step(ParamStore& params);

    std::int64_t step_count() const { return step_count_; }
    const Options& options() const { return opt_; }

private:
    struct Moments {
        std::vector<double> m;
        std::vector<double> v;
    };

    Options opt_;
    std::int64_t step_count_ = 0;
    std::vector<Moments> moments_;  // parallel to params.entries()
};

}  // namespace mma
