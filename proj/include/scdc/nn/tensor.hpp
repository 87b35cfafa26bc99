#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace scdc::nn {

using Shape = std::vector<std::size_t>;

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::string to_string(const Shape& shape);
std::size_t element_count(const Shape& shape);

struct Node;
using BackwardFn = std::function<void(Node&)>;

/// Storage and graph record behind a Tensor.
struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // empty until first needed
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    BackwardFn backward;  // empty for leaves

    std::span<double> ensure_grad();
};

/// Reference-counted n-dimensional double array taking part in reverse-mode
/// differentiation. Copies share storage; use `clone` for a deep copy.
class Tensor {
public:
    Tensor() = default;
    Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor filled(Shape shape, double value, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t size() const { return node_->value.size(); }

    std::span<double> values() { return node_->value; }
    std::span<const double> values() const { return node_->value; }
    double item() const;
    double at(std::size_t flat) const { return node_->value.at(flat); }
    double operator[](std::size_t flat) const { return node_->value[flat]; }

    bool requires_grad() const { return node_->requires_grad; }
    bool has_grad() const { return !node_->grad.empty(); }
    /// Gradient buffer, allocated (zero) on first access.
    std::span<double> grad() { return node_->ensure_grad(); }
    std::span<const double> grad() const { return node_->ensure_grad(); }
    void zero_grad();

    /// Populates gradients of every reachable tensor that requires them.
    /// Leaf gradients accumulate across calls; interior ones are reset first.
    void backward() const;

    /// Same values, no graph history, no gradient tracking.
    Tensor detach() const;
    Tensor clone() const;

    const std::shared_ptr<Node>& node() const { return node_; }
    static Tensor from_node(std::shared_ptr<Node> node);

private:
    std::shared_ptr<Node> node_;
};

/// While alive, operations on this thread record no graph.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

bool grad_enabled();

/// Builds an operation result. The backward closure is attached only when
/// recording is enabled and some parent requires a gradient.
Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                   BackwardFn backward);

}  // namespace scdc::nn
