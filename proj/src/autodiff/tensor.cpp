#include "gaitformer/autodiff/tensor.hpp"

#include "gaitformer/errors.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>
#include <utility>

namespace gaitformer::ad {

namespace detail {

struct Node {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;
    std::vector<double> pass_grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> inputs;
    BackwardFn backward;
    std::string op = "leaf";
};

} // namespace detail

namespace {

thread_local int no_grad_depth = 0;

std::shared_ptr<detail::Node> make_node(Shape shape, std::vector<double> values) {
    if (values.size() != shape_size(shape)) {
        throw ShapeError("tensor of shape " + shape_to_string(shape) + " cannot hold " +
                         std::to_string(values.size()) + " values");
    }
    auto node = std::make_shared<detail::Node>();
    node->shape = std::move(shape);
    node->values = std::move(values);
    return node;
}

} // namespace

std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (const auto d : shape) {
        n *= d;
    }
    return n;
}

std::string shape_to_string(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        out << (i ? ", " : "") << shape[i];
    }
    out << ']';
    return out.str();
}

NoGradGuard::NoGradGuard() { ++no_grad_depth; }
NoGradGuard::~NoGradGuard() { --no_grad_depth; }

bool grad_mode_enabled() { return no_grad_depth == 0; }

Tensor::Tensor() = default;

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    const auto n = shape_size(shape);
    return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
    auto node = make_node(std::move(shape), std::move(values));
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from(Shape{}, {value}, requires_grad);
}

Tensor Tensor::make_result(Shape shape, std::vector<double> values,
                           const std::vector<Tensor>& inputs, BackwardFn backward,
                           std::string op_name) {
    auto node = make_node(std::move(shape), std::move(values));
    node->op = std::move(op_name);
    const bool any_input_needs_grad =
        std::any_of(inputs.begin(), inputs.end(),
                    [](const Tensor& t) { return t.defined() && t.requires_grad(); });
    if (grad_mode_enabled() && any_input_needs_grad) {
        node->requires_grad = true;
        node->backward = std::move(backward);
        node->inputs.reserve(inputs.size());
        for (const auto& t : inputs) {
            node->inputs.push_back(t.node_);
        }
    }
    return Tensor(std::move(node));
}

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= node_->shape.size()) {
        throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                         shape_to_string(node_->shape));
    }
    return node_->shape[axis];
}

std::size_t Tensor::size() const { return node_->values.size(); }

std::span<double> Tensor::values() { return node_->values; }
std::span<const double> Tensor::values() const { return node_->values; }

double Tensor::item() const {
    if (size() != 1) {
        throw ShapeError("item() needs a single-element tensor, got " +
                         shape_to_string(node_->shape));
    }
    return node_->values.front();
}

bool Tensor::requires_grad() const { return node_->requires_grad; }

void Tensor::set_requires_grad(bool flag) {
    if (!is_leaf()) {
        throw Error("requires_grad can only be changed on leaf tensors");
    }
    node_->requires_grad = flag;
}

bool Tensor::has_grad() const { return !node_->grad.empty(); }
std::span<const double> Tensor::grad() const { return node_->grad; }

void Tensor::zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

bool Tensor::is_leaf() const { return !node_->backward; }
const std::string& Tensor::op_name() const { return node_->op; }
std::size_t Tensor::input_count() const { return node_->inputs.size(); }

void Tensor::backward() const {
    if (size() != 1) {
        throw ShapeError("backward() needs a scalar loss, got shape " +
                         shape_to_string(node_->shape));
    }
    if (!node_->requires_grad) {
        return;
    }

    // Post-order DFS gives inputs before consumers.
    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> visited;
    std::vector<std::pair<detail::Node*, std::size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    visited.insert(node_.get());
    while (!stack.empty()) {
        auto& [node, next_input] = stack.back();
        if (next_input < node->inputs.size()) {
            detail::Node* child = node->inputs[next_input++].get();
            if (child->requires_grad && visited.insert(child).second) {
                stack.emplace_back(child, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    for (auto* node : order) {
        node->pass_grad.assign(node->values.size(), 0.0);
    }
    node_->pass_grad[0] = 1.0;

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node* node = *it;
        if (!node->backward) {
            continue;
        }
        BackwardContext ctx{node->values, node->pass_grad, {}};
        ctx.input_grads.reserve(node->inputs.size());
        for (const auto& input : node->inputs) {
            if (input->requires_grad) {
                ctx.input_grads.emplace_back(input->pass_grad);
            } else {
                ctx.input_grads.emplace_back();
            }
        }
        node->backward(ctx);
    }

    // Each pass is summed separately and then folded into the leaf
    // accumulators, so repeated passes add exactly the same increment.
    for (auto* node : order) {
        if (node->backward) {
            node->grad = std::move(node->pass_grad);
        } else {
            if (node->grad.size() != node->pass_grad.size()) {
                node->grad.assign(node->pass_grad.size(), 0.0);
            }
            for (std::size_t i = 0; i < node->grad.size(); ++i) {
                node->grad[i] += node->pass_grad[i];
            }
        }
        node->pass_grad = {};
    }
}

Tensor Tensor::detach() const {
    return from(node_->shape, node_->values, false);
}

} // namespace gaitformer::ad
