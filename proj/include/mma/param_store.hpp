#pragma once

#include <string>
#include <vector>

#include "mma/tensor.hpp"

namespace mma {

// Named collection of trainable tensors. Iteration order is insertion order,
// which makes checkpoints and optimizer sweeps deterministic.
class ParamStore {
public:
    Tensor& add(const std::string& name, Tensor tensor);
    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;
    bool contains(const std::string& name) const;

    std::size_t size() const { return entries_.size(); }
    const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
    std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }

    void zero_grads();

    // Deep copy of all values (fresh grad buffers, zeroed).
    ParamStore clone() const;
    // Copies values from another store with identical names/shapes.
    void load_values_from(const ParamStore& other);

    // Sub-store view by name prefix; the returned store shares tensors.
    ParamStore with_prefix_stripped(const std::string& prefix) const;

private:
    std::vector<std::pair<std::string, Tensor>> entries_;
};

}  // namespace mma
