#include "mma/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "mma/error.hpp"

namespace mma {

std::size_t shape_size(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
}

std::string shape_str(const std::vector<int>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    for (int d : shape) {
        if (d < 0) throw DimensionError("negative dimension in " + shape_str(shape));
    }
    Tensor t;
    t.d_ = std::make_shared<Data>();
    t.d_->shape = std::move(shape);
    t.d_->value.assign(shape_size(t.d_->shape), 0.0);
    t.d_->requires_grad = requires_grad;
    if (requires_grad) t.d_->grad.assign(t.d_->value.size(), 0.0);
    return t;
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> values,
                    bool requires_grad) {
    if (shape_size(shape) != values.size()) {
        throw DimensionError("value count " + std::to_string(values.size()) +
                             " does not match shape " + shape_str(shape));
    }
    Tensor t = zeros(std::move(shape), requires_grad);
    t.d_->value = std::move(values);
    return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from({1}, {value}, requires_grad);
}

double Tensor::item() const {
    if (size() != 1) throw ContractError("item() on non-scalar tensor " + shape_str(shape()));
    return d_->value[0];
}

double Tensor::grad_item() const {
    if (size() != 1 || !d_->requires_grad) {
        throw ContractError("grad_item() needs a scalar tensor with a grad buffer");
    }
    return d_->grad[0];
}

void Tensor::zero_grad() {
    if (d_ && d_->requires_grad) std::fill(d_->grad.begin(), d_->grad.end(), 0.0);
}

Tensor Tensor::clone_values() const {
    Tensor t;
    t.d_ = std::make_shared<Data>();
    t.d_->shape = d_->shape;
    t.d_->value = d_->value;
    t.d_->requires_grad = d_->requires_grad;
    if (d_->requires_grad) t.d_->grad.assign(d_->value.size(), 0.0);
    return t;
}

Tensor Tape::alloc(std::vector<int> shape, bool requires_grad) {
    Tensor t = Tensor::zeros(std::move(shape), requires_grad);
    t.d_->tape_output = true;
    if (requires_grad) outputs_.push_back(t);
    return t;
}

void Tape::record(std::function<void()> backward_rule) {
    rules_.push_back(std::move(backward_rule));
}

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1) {
        throw ContractError("backward: loss must be a scalar tensor");
    }
    bool mine = false;
    for (const Tensor& t : outputs_) {
        if (t.same_storage(loss)) {
            mine = true;
            break;
        }
    }
    if (!loss.requires_grad() || !mine) {
        throw ContractError("backward: loss was not recorded on this tape");
    }
    for (Tensor& t : outputs_) t.zero_grad();
    loss.d_->grad[0] = 1.0;
    for (auto it = rules_.rbegin(); it != rules_.rend(); ++it) (*it)();
}

}  // namespace mma
