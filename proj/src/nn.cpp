#include "dacer/nn.hpp"

#include <cmath>

#include "dacer/errors.hpp"

namespace dacer {

Activation parse_activation(const std::string& s) {
    if (s == "gelu") return Activation::GeLU;
    if (s == "mish") return Activation::Mish;
    throw ConfigError("unknown activation '" + s + "' (expected gelu|mish)");
}

std::string to_string(Activation a) { return a == Activation::GeLU ? "gelu" : "mish"; }

Mlp::Mlp(std::vector<int> dims, Activation act, Rng& rng) : dims_(std::move(dims)), act_(act) {
    if (dims_.size() < 2) throw ConfigError("mlp needs at least input and output dims");
    for (int d : dims_)
        if (d <= 0) throw ConfigError("mlp dims must be positive");
    for (size_t l = 0; l + 1 < dims_.size(); ++l) {
        const int in = dims_[l], out = dims_[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        Tensor W({out, in});
        for (int64_t i = 0; i < W.numel(); ++i) W.at(i) = rng.uniform(-bound, bound);
        Tensor b({out});
        for (int64_t i = 0; i < b.numel(); ++i) b.at(i) = rng.uniform(-bound, bound);
        W.requires_grad = b.requires_grad = true;
        W.ensure_grad();
        b.ensure_grad();
        weights_.push_back(std::move(W));
        biases_.push_back(std::move(b));
    }
}

Tensor Mlp::forward(const Tensor& x) const {
    if (x.shape.size() != 2 || x.shape[1] != dims_.front())
        throw DimensionError("mlp forward: input " + x.shape_str() + " does not match in_dim " +
                             std::to_string(dims_.front()));
    ++forward_calls_;
    Tensor h = x;
    for (size_t l = 0; l < weights_.size(); ++l) {
        h = linear(h, weights_[l], biases_[l]);
        if (l + 1 < weights_.size())
            h = act_ == Activation::GeLU ? gelu(h) : mish(h);
    }
    return h;
}

std::vector<Tensor*> Mlp::params() {
    std::vector<Tensor*> ps;
    for (size_t l = 0; l < weights_.size(); ++l) {
        ps.push_back(&weights_[l]);
        ps.push_back(&biases_[l]);
    }
    return ps;
}

std::vector<const Tensor*> Mlp::params() const {
    std::vector<const Tensor*> ps;
    for (size_t l = 0; l < weights_.size(); ++l) {
        ps.push_back(&weights_[l]);
        ps.push_back(&biases_[l]);
    }
    return ps;
}

void Mlp::copy_params_from(const Mlp& other) {
    if (other.dims_ != dims_ || other.act_ != act_)
        throw ContractError("copy_params_from: architecture mismatch");
    for (size_t l = 0; l < weights_.size(); ++l) {
        *weights_[l].data = *other.weights_[l].data;
        *biases_[l].data = *other.biases_[l].data;
    }
}

Tensor sinusoidal_embed(int t, int dim) {
    if (dim <= 0 || dim % 2 != 0)
        throw ConfigError("sinusoidal_embed: dim must be a positive even integer");
    if (t < 0) throw ContractError("sinusoidal_embed: t must be >= 0");
    Tensor out({dim});
    const int half = dim / 2;
    for (int k = 1; k <= half; ++k) {
        double w = std::pow(10000.0, -2.0 * k / dim);
        out.at(k - 1) = std::sin(t * w);
        out.at(half + k - 1) = std::cos(t * w);
    }
    return out;
}

Tensor sinusoidal_embed_rows(int t, int dim, int batch) {
    Tensor row = sinusoidal_embed(t, dim);
    Tensor out({batch, dim});
    for (int r = 0; r < batch; ++r)
        std::copy_n(row.data->data(), dim, out.data->data() + static_cast<size_t>(r) * dim);
    return out;
}

Adam::Adam(std::vector<Tensor*> params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (lr <= 0) throw ConfigError("adam: lr must be positive");
    for (Tensor* p : params) {
        p->ensure_grad();
        params_.push_back(*p); // aliasing copy: shares data and grad buffers
        m_.emplace_back(p->numel(), 0.0);
        v_.emplace_back(p->numel(), 0.0);
    }
}

void Adam::step() {
    // Validate every gradient before touching any state: a rejected update
    // must leave parameters and moments exactly as they were.
    for (const Tensor& p : params_)
        for (double g : *p.grad)
            if (!std::isfinite(g)) throw NumericFault("adam: non-finite gradient, update rejected");

    if (global_clip_ > 0.0) {
        double sq = 0.0;
        for (const Tensor& p : params_)
            for (double g : *p.grad) sq += g * g;
        double norm = std::sqrt(sq);
        if (norm > global_clip_) {
            double s = global_clip_ / norm;
            for (Tensor& p : params_)
                for (double& g : *p.grad) g *= s;
        }
    }

    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        auto& data = *params_[i].data;
        const auto& grad = *params_[i].grad;
        auto& m = m_[i];
        auto& v = v_[i];
        for (size_t j = 0; j < data.size(); ++j) {
            const double g = grad[j];
            m[j] = beta1_ * m[j] + (1.0 - beta1_) * g;
            v[j] = beta2_ * v[j] + (1.0 - beta2_) * g * g;
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            data[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

void Adam::zero_grad() {
    for (Tensor& p : params_) p.zero_grad();
}

} // namespace dacer
