#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dacer/errors.hpp"

namespace dacer {

// Dense row-major float64 array participating in reverse-mode autodiff.
//
// Value semantics with shared buffers: copying a Tensor aliases its data and
// grad, so parameter tensors held by a network and captured by tape closures
// see the same storage. Supported ranks: 1-D {n} and 2-D {rows, cols}.
struct Tensor {
    std::vector<int> shape;
    std::shared_ptr<std::vector<double>> data;
    std::shared_ptr<std::vector<double>> grad; // nullptr until needed
    int64_t node = -1;   // producing node on the active tape, -1 = not produced by an op
    uint64_t epoch = 0;  // tape epoch `node` refers to
    bool requires_grad = false;

    Tensor() : data(std::make_shared<std::vector<double>>()) {}
    explicit Tensor(std::vector<int> shp);
    Tensor(std::vector<int> shp, std::vector<double> vals);

    static Tensor scalar(double v) { return Tensor({1}, {v}); }
    static Tensor zeros(std::vector<int> shp) { return Tensor(std::move(shp)); }
    static Tensor full(std::vector<int> shp, double v);

    int64_t numel() const { return static_cast<int64_t>(data->size()); }
    // 2-D view: 1-D tensors are treated as a single row.
    int rows() const { return shape.size() == 2 ? shape[0] : 1; }
    int cols() const { return shape.size() == 2 ? shape[1] : static_cast<int>(shape[0]); }

    double& at(int64_t i) { return (*data)[static_cast<size_t>(i)]; }
    double at(int64_t i) const { return (*data)[static_cast<size_t>(i)]; }
    double& at(int r, int c) { return (*data)[static_cast<size_t>(r) * cols() + c]; }
    double at(int r, int c) const { return (*data)[static_cast<size_t>(r) * cols() + c]; }

    bool on_tape() const { return node >= 0; }
    bool wants_grad() const { return requires_grad || on_tape(); }

    // Allocate (zero-filled) grad storage if absent.
    void ensure_grad();
    void zero_grad();
    // Same data, no tape membership, no gradient demand.
    Tensor detach() const;
    // Deep copy of values (no grad, off tape).
    Tensor clone() const;

    bool all_finite() const;
    std::string shape_str() const;
};

bool same_shape(const Tensor& a, const Tensor& b);

// Reverse-mode tape. One tape is active at a time (RAII); ops record
// themselves on the active tape unless a NoGrad guard is in force. backward()
// consumes the recorded graph and bumps the epoch, so tensors produced before
// the bump cannot be fed into later ops (they would reference freed nodes).
class GradTape {
  public:
    GradTape();
    ~GradTape();
    GradTape(const GradTape&) = delete;
    GradTape& operator=(const GradTape&) = delete;

    // Seeds d(loss)/d(loss) = 1 and propagates adjoints to every recorded
    // input with wants_grad(). loss must be a scalar produced this epoch.
    void backward(const Tensor& loss);
    // Drop all nodes and start a new epoch.
    void reset();

    uint64_t epoch() const { return epoch_; }
    size_t size() const { return nodes_.size(); }

    // Active tape, or nullptr when none exists / NoGrad is in force.
    static GradTape* active();

    int64_t push(std::function<void()> backward_fn);

  private:
    std::vector<std::function<void()>> nodes_;
    uint64_t epoch_ = 1;
};

// RAII guard: while alive, ops compute values only and record nothing.
struct NoGrad {
    NoGrad();
    ~NoGrad();
    NoGrad(const NoGrad&) = delete;
    NoGrad& operator=(const NoGrad&) = delete;
};

// ---- differentiable ops ----------------------------------------------------
// Each op validates shapes, computes the forward value, and if a tape is
// active records a closure that accumulates input adjoints from the output's.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b); // elementwise
Tensor scale(const Tensor& a, double c);
Tensor neg(const Tensor& a);
Tensor square(const Tensor& a);
// Elementwise min; on ties the gradient routes to the first argument.
Tensor minimum(const Tensor& a, const Tensor& b);
// Clip to [lo, hi]; gradient is zero outside the open interval.
Tensor clamp(const Tensor& a, double lo, double hi);
Tensor tanh_op(const Tensor& a);
// x * Phi(x) with the exact Gaussian CDF.
Tensor gelu(const Tensor& a);
// x * tanh(softplus(x)).
Tensor mish(const Tensor& a);
// y = x * W^T + b  with x [B,in], W [out,in], b [out] -> y [B,out].
Tensor linear(const Tensor& x, const Tensor& W, const Tensor& b);
// Column-wise concatenation of 2-D tensors with equal row counts.
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor sum(const Tensor& a);  // -> scalar {1}
Tensor mean(const Tensor& a); // -> scalar {1}
// Row-wise sum of a 2-D tensor -> [B, 1].
Tensor row_sum(const Tensor& a);

} // namespace dacer
