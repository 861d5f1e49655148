#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gaitformer::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// Everything a backward rule sees. input_grads[i] is empty when input i does
// not require a gradient; otherwise the rule must add (never assign) into it.
struct BackwardContext {
    std::span<const double> output;
    std::span<const double> grad_output;
    std::vector<std::span<double>> input_grads;
};

using BackwardFn = std::function<void(const BackwardContext&)>;

namespace detail {
struct Node;
}

// Disables graph recording on the current thread while alive. Results built
// under the guard are leaves with no provenance.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;
};

bool grad_mode_enabled();

// Dense float64 array that records the operation that produced it.
//
// A Tensor is a cheap handle: copies share the same node, so mutating
// values() through one copy is visible through every other. Leaves that
// require gradients accumulate into grad() across backward passes until
// zero_grad() is called; interior nodes hold the gradient of the most
// recent pass.
class Tensor {
public:
    Tensor();

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    // Builds the result of a custom operation. Provenance is recorded only if
    // some input requires gradients and grad mode is enabled.
    static Tensor make_result(Shape shape, std::vector<double> values,
                              const std::vector<Tensor>& inputs, BackwardFn backward,
                              std::string op_name);

    bool defined() const { return static_cast<bool>(node_); }

    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const;

    std::span<double> values();
    std::span<const double> values() const;
    double item() const;
    double at(std::size_t flat_index) const { return values()[flat_index]; }

    bool requires_grad() const;
    void set_requires_grad(bool flag);
    bool has_grad() const;
    std::span<const double> grad() const;
    void zero_grad();

    bool is_leaf() const;
    const std::string& op_name() const;
    std::size_t input_count() const;

    // Reverse-mode sweep from this scalar. Throws ShapeError if size() != 1.
    void backward() const;

    // New leaf holding a copy of the values, without provenance.
    Tensor detach() const;

    bool same_node(const Tensor& other) const { return node_ == other.node_; }

private:
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

    std::shared_ptr<detail::Node> node_;
};

// A trainable tensor together with its stable, dotted parameter path.
struct NamedTensor {
    std::string name;
    Tensor tensor;
};

using ParamList = std::vector<NamedTensor>;

} // namespace gaitformer::ad
