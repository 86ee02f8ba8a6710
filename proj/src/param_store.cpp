#include "mma/param_store.hpp"

#include "mma/error.hpp"

namespace mma {

Tensor& ParamStore::add(const std::string& name, Tensor tensor) {
    if (contains(name)) throw ContractError("ParamStore: duplicate parameter " + name);
    entries_.emplace_back(name, std::move(tensor));
    return entries_.back().second;
}

Tensor& ParamStore::get(const std::string& name) {
    for (auto& [n, t] : entries_)
        if (n == name) return t;
    throw ContractError("ParamStore: unknown parameter " + name);
}

const Tensor& ParamStore::get(const std::string& name) const {
    for (const auto& [n, t] : entries_)
        if (n == name) return t;
    throw ContractError("ParamStore: unknown parameter " + name);
}

bool ParamStore::contains(const std::string& name) const {
    for (const auto& [n, t] : entries_)
        if (n == name) return true;
    return false;
}

void ParamStore::zero_grads() {
    for (auto& [n, t] : entries_) t.zero_grad();
}

ParamStore ParamStore::clone() const {
    ParamStore out;
    for (const auto& [n, t] : entries_) out.add(n, t.clone_values());
    return out;
}

void ParamStore::load_values_from(const ParamStore& other) {
    if (other.size() != size())
        throw CheckpointMismatchError("parameter count mismatch: have " +
                                      std::to_string(size()) + ", loading " +
                                      std::to_string(other.size()));
    for (auto& [name, t] : entries_) {
        if (!other.contains(name))
            throw CheckpointMismatchError("parameter " + name + " missing from source");
        const Tensor& src = other.get(name);
        if (src.shape() != t.shape())
            throw CheckpointMismatchError("shape mismatch for " + name + ": " +
                                          shape_str(t.shape()) + " vs " +
                                          shape_str(src.shape()));
        t.value() = src.value();
    }
}

ParamStore ParamStore::with_prefix_stripped(const std::string& prefix) const {
    ParamStore out;
    for (const auto& [name, t] : entries_) {
        if (name.rfind(prefix, 0) == 0) out.add(name.substr(prefix.size()), t);
    }
    return out;
}

}  // namespace mma
