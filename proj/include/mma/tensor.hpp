#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace mma {

// Dense row-major double tensor. Tensor is a cheap handle; copies share
// storage. grad is allocated iff requires_grad and always matches data size.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor from(std::vector<int> shape, std::vector<double> values,
                       bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return static_cast<bool>(d_); }
    const std::vector<int>& shape() const { return d_->shape; }
    int rank() const { return static_cast<int>(d_->shape.size()); }
    int dim(int axis) const { return d_->shape[static_cast<std::size_t>(axis)]; }
    std::size_t size() const { return d_->value.size(); }

    // Handle semantics: a const Tensor still refers to shared, mutable
    // storage, so accessors are const and hand back mutable references.
    std::vector<double>& value() const { return d_->value; }
    double* data() const { return d_->value.data(); }

    bool requires_grad() const { return d_->requires_grad; }
    std::vector<double>& grad() const { return d_->grad; }

    // Scalar accessors; contract-checked.
    double item() const;
    double grad_item() const;

    void zero_grad();

    // Detached deep copy of the values (no grad, no graph history).
    Tensor clone_values() const;

    // Identity test on the underlying storage.
    bool same_storage(const Tensor& other) const { return d_ == other.d_; }

private:
    friend class Tape;

    struct Data {
        std::vector<int> shape;
        std::vector<double> value;
        bool requires_grad = false;
        std::vector<double> grad;
        bool tape_output = false;
    };

    std::shared_ptr<Data> d_;
};

std::size_t shape_size(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

// Records the backward rule of every differentiable op applied through it.
// backward(loss) zeroes the grads of all tensors this tape produced, seeds
// d(loss)/d(loss) = 1 and replays every recorded rule once in reverse order.
// Leaf tensors (parameters, inputs) are only ever accumulated into, so their
// grads add up across backward calls until explicitly zeroed.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Creates an op output registered with this tape.
    Tensor alloc(std::vector<int> shape, bool requires_grad);

    void record(std::function<void()> backward_rule);

    void backward(const Tensor& loss);

    std::size_t op_count() const { return rules_.size(); }

private:
    std::vector<std::function<void()>> rules_;
    std::vector<Tensor> outputs_;
};

}  // namespace mma
