#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dacer/rng.hpp"
#include "dacer/tensor.hpp"

namespace dacer {

enum class Activation { GeLU, Mish };

Activation parse_activation(const std::string& s);
std::string to_string(Activation a);

// Plain fully-connected stack. Activation is applied between layers, never
// after the final one. Weights are [out,in], biases [out], both initialized
// uniformly in ±1/sqrt(fan_in).
class Mlp {
  public:
    Mlp() = default;
    Mlp(std::vector<int> dims, Activation act, Rng& rng);

    Tensor forward(const Tensor& x) const;

    int in_dim() const { return dims_.front(); }
    int out_dim() const { return dims_.back(); }
    const std::vector<int>& dims() const { return dims_; }
    Activation activation() const { return act_; }

    std::vector<Tensor*> params();
    std::vector<const Tensor*> params() const;
    size_t layer_count() const { return weights_.size(); }
    Tensor& weight(size_t layer) { return weights_[layer]; }
    Tensor& bias(size_t layer) { return biases_[layer]; }
    const Tensor& weight(size_t layer) const { return weights_[layer]; }
    const Tensor& bias(size_t layer) const { return biases_[layer]; }

    // How many times forward() has run — lets tests pin call-count contracts.
    int64_t forward_calls() const { return forward_calls_; }
    void reset_forward_calls() { forward_calls_ = 0; }

    // Overwrite parameters from another net of identical architecture.
    void copy_params_from(const Mlp& other);

  private:
    std::vector<int> dims_;
    Activation act_ = Activation::GeLU;
    std::vector<Tensor> weights_, biases_;
    mutable int64_t forward_calls_ = 0;
};

// Sinusoidal timestep features: [sin(t*w_1..w_{dim/2}), cos(t*w_1..w_{dim/2})]
// with w_k = 10000^(-2k/dim). dim must be even, t >= 0.
Tensor sinusoidal_embed(int t, int dim);
// Same features broadcast to a [batch, dim] tensor (constant, off-tape).
Tensor sinusoidal_embed_rows(int t, int dim, int batch);

// Adam with bias correction over a fixed parameter list. step() reads each
// parameter's grad buffer; any non-finite gradient rejects the whole update
// (NumericFault) before anything is mutated.
class Adam {
  public:
    Adam(std::vector<Tensor*> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);

    void step();
    void zero_grad();

    int64_t step_count() const { return t_; }
    double lr() const { return lr_; }
    // Global gradient-norm clip applied before the moment update; 0 disables.
    void set_global_clip(double c) { global_clip_ = c; }

    // Exposed for recurrence tests.
    const std::vector<double>& first_moment(size_t param_index) const { return m_[param_index]; }
    const std::vector<double>& second_moment(size_t param_index) const { return v_[param_index]; }

  private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    double global_clip_ = 0.0;
    int64_t t_ = 0;
};

} // namespace dacer
