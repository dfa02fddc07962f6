#include "dacer/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace dacer {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

thread_local GradTape* g_active_tape = nullptr;
thread_local int g_nograd_depth = 0;

int64_t shape_numel(const std::vector<int>& shape) {
    if (shape.empty()) throw DimensionError("tensor shape must have 1 or 2 dims");
    if (shape.size() > 2) throw DimensionError("tensors are limited to 2 dims");
    int64_t n = 1;
    for (int s : shape) {
        if (s <= 0) throw DimensionError("tensor dims must be positive");
        n *= s;
    }
    return n;
}

void check_epoch(const Tensor& t, const GradTape* tape) {
    if (t.on_tape() && t.epoch != tape->epoch())
        throw ContractError("tensor from a previous tape epoch used as an op input");
}

// Shared boilerplate: validates input epochs, allocates grads, records the
// closure. `ins` lists the inputs whose adjoints the closure will touch.
template <typename Fn>
void record(Tensor& out, std::initializer_list<const Tensor*> ins, Fn&& make_backward) {
    GradTape* tape = GradTape::active();
    if (!tape) return;
    for (const Tensor* t : ins) check_epoch(*t, tape);
    out.ensure_grad();
    out.epoch = tape->epoch();
    out.node = tape->push(make_backward());
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

constexpr double kInvSqrt2Pi = 0.3989422804014326779399;

} // namespace

// ---- Tensor -----------------------------------------------------------------

Tensor::Tensor(std::vector<int> shp)
    : shape(std::move(shp)),
      data(std::make_shared<std::vector<double>>(static_cast<size_t>(shape_numel(shape)), 0.0)) {}

Tensor::Tensor(std::vector<int> shp, std::vector<double> vals)
    : shape(std::move(shp)), data(std::make_shared<std::vector<double>>(std::move(vals))) {
    if (shape_numel(shape) != static_cast<int64_t>(data->size()))
        throw DimensionError("value count " + std::to_string(data->size()) +
                             " does not match shape " + shape_str());
}

Tensor Tensor::full(std::vector<int> shp, double v) {
    Tensor t(std::move(shp));
    std::fill(t.data->begin(), t.data->end(), v);
    return t;
}

void Tensor::ensure_grad() {
    if (!grad) grad = std::make_shared<std::vector<double>>(data->size(), 0.0);
}

void Tensor::zero_grad() {
    if (grad) std::fill(grad->begin(), grad->end(), 0.0);
}

Tensor Tensor::detach() const {
    Tensor t;
    t.shape = shape;
    t.data = data;
    return t;
}

Tensor Tensor::clone() const {
    Tensor t;
    t.shape = shape;
    t.data = std::make_shared<std::vector<double>>(*data);
    return t;
}

bool Tensor::all_finite() const {
    for (double v : *data)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

// ---- GradTape ---------------------------------------------------------------

GradTape::GradTape() {
    if (g_active_tape)
        throw ContractError("a gradient tape is already active on this thread");
    g_active_tape = this;
}

GradTape::~GradTape() {
    if (g_active_tape == this) g_active_tape = nullptr;
}

GradTape* GradTape::active() {
    return g_nograd_depth > 0 ? nullptr : g_active_tape;
}

int64_t GradTape::push(std::function<void()> backward_fn) {
    nodes_.push_back(std::move(backward_fn));
    return static_cast<int64_t>(nodes_.size()) - 1;
}

void GradTape::backward(const Tensor& loss) {
    if (loss.numel() != 1)
        throw ContractError("backward requires a scalar loss, got shape " + loss.shape_str());
    if (!loss.on_tape() || loss.epoch != epoch_)
        throw ContractError("backward: loss was not produced on the active tape epoch");
    (*loss.grad)[0] = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
    reset();
}

void GradTape::reset() {
    nodes_.clear();
    ++epoch_;
}

NoGrad::NoGrad() { ++g_nograd_depth; }
NoGrad::~NoGrad() { --g_nograd_depth; }

// ---- elementwise ops --------------------------------------------------------

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!same_shape(a, b))
        throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                             b.shape_str());
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out(a.shape);
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) out.at(i) = a.at(i) + b.at(i);
    record(out, {&a, &b}, [&] {
        Tensor ga = a, gb = b, go = out;
        bool aw = a.wants_grad(), bw = b.wants_grad();
        if (aw) ga.ensure_grad();
        if (bw) gb.ensure_grad();
        return [ga, gb, go, aw, bw, n]() {
            const auto& og = *go.grad;
            if (aw) for (int64_t i = 0; i < n; ++i) (*ga.grad)[i] += og[i];
            if (bw) for (int64_t i = 0; i < n; ++i) (*gb.grad)[i] += og[i];
        };
    });
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Tensor out(a.shape);
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) out.at(i) = a.at(i) - b.at(i);
    record(out, {&a, &b}, [&] {
        Tensor ga = a, gb = b, go = out;
        bool aw = a.wants_grad(), bw = b.wants_grad();
        if (aw) ga.ensure_grad();
        if (bw) gb.ensure_grad();
        return [ga, gb, go, aw, bw, n]() {
            const auto& og = *go.grad;
            if (aw) for (int64_t i = 0; i < n; ++i) (*ga.grad)[i] += og[i];
            if (bw) for (int64_t i = 0; i < n; ++i) (*gb.grad)[i] -= og[i];
        };
    });
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Tensor out(a.shape);
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) out.at(i) = a.at(i) * b.at(i);
    record(out, {&a, &b}, [&] {
        Tensor ga = a, gb = b, go = out;
        bool aw = a.wants_grad(), bw = b.wants_grad();
        if (aw) ga.ensure_grad();
        if (bw) gb.ensure_grad();
        return [ga, gb, go, aw, bw, n]() {
            const auto& og = *go.grad;
            if (aw) for (int64_t i = 0; i < n; ++i) (*ga.grad)[i] += og[i] * (*gb.data)[i];
            if (bw) for (int64_t i = 0; i < n; ++i) (*gb.grad)[i] += og[i] * (*ga.data)[i];
        };
    });
    return out;
}

Tensor scale(const Tensor& a, double c) {
    Tensor out(a.shape);
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) out.at(i) = c * a.at(i);
    record(out, {&a}, [&] {
        Tensor ga = a, go = out;
        bool aw = a.wants_grad();
        if (aw) ga.ensure_grad();
        return [ga, go, aw, c, n]() {
            if (!aw) return;
            const auto& og = *go.grad;
            for (int64_t i = 0; i < n; ++i) (*ga.grad)[i] += c * og[i];
        };
    });
    return out;
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor square(const Tensor& a) {
    Tensor out(a.shape);
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) out.at(i) = a.at(i) * a.at(i);
    record(out, {&a}, [&] {
        Tensor ga = a, go = out;
        bool aw = a.wants_grad();
        if (aw) ga.ensure_grad();
        return [ga, go, aw, n]() {
            if (!aw) return;
            const auto& og = *go.grad;
            for (int64_t i = 0; i < n; ++i) (*ga.grad)[i] += 2.0 * (*ga.data)[i] * og[i];
        };
    });
    return out;
}

Tensor minimum(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "minimum");
    Tensor out(a.shape);
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) out.at(i) = std::min(a.at(i), b.at(i));
    record(out, {&a, &b}, [&] {
        Tensor ga = a, gb = b, go = out;
        bool aw = a.wants_grad(), bw = b.wants_grad();
        if (aw) ga.ensure_grad();
        if (bw) gb.ensure_grad();
        return [ga, gb, go, aw, bw, n]() {
            const auto& og = *go.grad;
            for (int64_t i = 0; i < n; ++i) {
                bool first = (*ga.data)[i] <= (*gb.data)[i];
                if (first && aw) (*ga.grad)[i] += og[i];
                if (!first && bw) (*gb.grad)[i] += og[i];
            }
        };
    });
    return out;
}

Tensor clamp(const Tensor& a, double lo, double hi) {
    if (lo > hi) throw ContractError("clamp: lo > hi");
    Tensor out(a.shape);
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) out.at(i) = std::min(hi, std::max(lo, a.at(i)));
    record(out, {&a}, [&] {
        Tensor ga = a, go = out;
        bool aw = a.wants_grad();
        if (aw) ga.ensure_grad();
        return [ga, go, aw, lo, hi, n]() {
            if (!aw) return;
            const auto& og = *go.grad;
            for (int64_t i = 0; i < n; ++i) {
                double x = (*ga.data)[i];
                if (x > lo && x < hi) (*ga.grad)[i] += og[i];
            }
        };
    });
    return out;
}

Tensor tanh_op(const Tensor& a) {
    Tensor out(a.shape);
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) out.at(i) = std::tanh(a.at(i));
    record(out, {&a}, [&] {
        Tensor ga = a, go = out;
        bool aw = a.wants_grad();
        if (aw) ga.ensure_grad();
        return [ga, go, aw, n]() {
            if (!aw) return;
            const auto& og = *go.grad;
            for (int64_t i = 0; i < n; ++i) {
                double t = (*go.data)[i];
                (*ga.grad)[i] += og[i] * (1.0 - t * t);
            }
        };
    });
    return out;
}

Tensor gelu(const Tensor& a) {
    Tensor out(a.shape);
    const int64_t n = a.numel();
    // Phi(x) saved for the backward pass (it costs an erfc to recompute).
    auto cdf = GradTape::active() ? std::make_shared<std::vector<double>>(n) : nullptr;
    for (int64_t i = 0; i < n; ++i) {
        double x = a.at(i);
        double phi = 0.5 * std::erfc(-x * M_SQRT1_2);
        out.at(i) = x * phi;
        if (cdf) (*cdf)[i] = phi;
    }
    record(out, {&a}, [&] {
        Tensor ga = a, go = out;
        bool aw = a.wants_grad();
        if (aw) ga.ensure_grad();
        return [ga, go, aw, cdf, n]() {
            if (!aw) return;
            const auto& og = *go.grad;
            for (int64_t i = 0; i < n; ++i) {
                double x = (*ga.data)[i];
                double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
                (*ga.grad)[i] += og[i] * ((*cdf)[i] + x * pdf);
            }
        };
    });
    return out;
}

Tensor mish(const Tensor& a) {
    Tensor out(a.shape);
    const int64_t n = a.numel();
    auto tn = GradTape::active() ? std::make_shared<std::vector<double>>(n) : nullptr;
    for (int64_t i = 0; i < n; ++i) {
        double x = a.at(i);
        double sp = x > 30.0 ? x : std::log1p(std::exp(x));
        double t = std::tanh(sp);
        out.at(i) = x * t;
        if (tn) (*tn)[i] = t;
    }
    record(out, {&a}, [&] {
        Tensor ga = a, go = out;
        bool aw = a.wants_grad();
        if (aw) ga.ensure_grad();
        return [ga, go, aw, tn, n]() {
            if (!aw) return;
            const auto& og = *go.grad;
            for (int64_t i = 0; i < n; ++i) {
                double x = (*ga.data)[i];
                double t = (*tn)[i];
                (*ga.grad)[i] += og[i] * (t + x * (1.0 - t * t) * stable_sigmoid(x));
            }
        };
    });
    return out;
}

// ---- linear / structural ops ------------------------------------------------

Tensor linear(const Tensor& x, const Tensor& W, const Tensor& b) {
    if (x.shape.size() != 2 || W.shape.size() != 2 || b.shape.size() != 1)
        throw DimensionError("linear: expects x [B,in], W [out,in], b [out]");
    const int B = x.shape[0], in = x.shape[1], out_dim = W.shape[0];
    if (W.shape[1] != in)
        throw DimensionError("linear: input width " + std::to_string(in) +
                             " does not match weight " + W.shape_str());
    if (b.shape[0] != out_dim)
        throw DimensionError("linear: bias " + b.shape_str() + " does not match weight " +
                             W.shape_str());

    Tensor out({B, out_dim});
    {
        ConstMatMap X(x.data->data(), B, in);
        ConstMatMap Wm(W.data->data(), out_dim, in);
        MatMap Y(out.data->data(), B, out_dim);
        Y.noalias() = X * Wm.transpose();
        Y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b.data->data(), out_dim);
    }
    record(out, {&x, &W, &b}, [&] {
        Tensor gx = x, gW = W, gb = b, go = out;
        bool xw = x.wants_grad(), ww = W.wants_grad(), bw = b.wants_grad();
        if (xw) gx.ensure_grad();
        if (ww) gW.ensure_grad();
        if (bw) gb.ensure_grad();
        return [gx, gW, gb, go, xw, ww, bw, B, in, out_dim]() {
            ConstMatMap dY(go.grad->data(), B, out_dim);
            ConstMatMap X(gx.data->data(), B, in);
            ConstMatMap Wm(gW.data->data(), out_dim, in);
            if (xw) {
                MatMap dX(gx.grad->data(), B, in);
                dX.noalias() += dY * Wm;
            }
            if (ww) {
                MatMap dW(gW.grad->data(), out_dim, in);
                dW.noalias() += dY.transpose() * X;
            }
            if (bw) {
                Eigen::Map<Eigen::RowVectorXd> db(gb.grad->data(), out_dim);
                db += dY.colwise().sum();
            }
        };
    });
    return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ContractError("concat_cols: no inputs");
    int B = -1, total = 0;
    for (const Tensor& p : parts) {
        if (p.shape.size() != 2) throw DimensionError("concat_cols: all inputs must be 2-D");
        if (B < 0) B = p.shape[0];
        else if (p.shape[0] != B)
            throw DimensionError("concat_cols: row counts differ");
        total += p.shape[1];
    }
    Tensor out({B, total});
    int off = 0;
    for (const Tensor& p : parts) {
        const int c = p.shape[1];
        for (int r = 0; r < B; ++r)
            std::copy_n(p.data->data() + static_cast<size_t>(r) * c, c,
                        out.data->data() + static_cast<size_t>(r) * total + off);
        off += c;
    }
    if (GradTape* tape = GradTape::active()) {
        for (const Tensor& p : parts) check_epoch(p, tape);
        out.ensure_grad();
        out.epoch = tape->epoch();
        struct In {
            Tensor t;
            int off, cols;
            bool wants;
        };
        auto ins = std::make_shared<std::vector<In>>();
        off = 0;
        for (const Tensor& p : parts) {
            Tensor cp = p;
            bool w = p.wants_grad();
            if (w) cp.ensure_grad();
            ins->push_back({cp, off, p.shape[1], w});
            off += p.shape[1];
        }
        Tensor go = out;
        out.node = tape->push([ins, go, B, total]() {
            for (const In& in : *ins) {
                if (!in.wants) continue;
                for (int r = 0; r < B; ++r) {
                    const double* src =
                        go.grad->data() + static_cast<size_t>(r) * total + in.off;
                    double* dst = in.t.grad->data() + static_cast<size_t>(r) * in.cols;
                    for (int c = 0; c < in.cols; ++c) dst[c] += src[c];
                }
            }
        });
    }
    return out;
}

Tensor sum(const Tensor& a) {
    Tensor out({1});
    const int64_t n = a.numel();
    double s = 0.0;
    for (int64_t i = 0; i < n; ++i) s += a.at(i);
    out.at(0) = s;
    record(out, {&a}, [&] {
        Tensor ga = a, go = out;
        bool aw = a.wants_grad();
        if (aw) ga.ensure_grad();
        return [ga, go, aw, n]() {
            if (!aw) return;
            double g = (*go.grad)[0];
            for (int64_t i = 0; i < n; ++i) (*ga.grad)[i] += g;
        };
    });
    return out;
}

Tensor mean(const Tensor& a) {
    Tensor out({1});
    const int64_t n = a.numel();
    double s = 0.0;
    for (int64_t i = 0; i < n; ++i) s += a.at(i);
    out.at(0) = s / static_cast<double>(n);
    record(out, {&a}, [&] {
        Tensor ga = a, go = out;
        bool aw = a.wants_grad();
        if (aw) ga.ensure_grad();
        return [ga, go, aw, n]() {
            if (!aw) return;
            double g = (*go.grad)[0] / static_cast<double>(n);
            for (int64_t i = 0; i < n; ++i) (*ga.grad)[i] += g;
        };
    });
    return out;
}

Tensor row_sum(const Tensor& a) {
    if (a.shape.size() != 2) throw DimensionError("row_sum: expects a 2-D tensor");
    const int B = a.shape[0], c = a.shape[1];
    Tensor out({B, 1});
    for (int r = 0; r < B; ++r) {
        double s = 0.0;
        for (int j = 0; j < c; ++j) s += a.at(r, j);
        out.at(r, 0) = s;
    }
    record(out, {&a}, [&] {
        Tensor ga = a, go = out;
        bool aw = a.wants_grad();
        if (aw) ga.ensure_grad();
        return [ga, go, aw, B, c]() {
            if (!aw) return;
            for (int r = 0; r < B; ++r) {
                double g = (*go.grad)[static_cast<size_t>(r)];
                double* dst = ga.grad->data() + static_cast<size_t>(r) * c;
                for (int j = 0; j < c; ++j) dst[j] += g;
            }
        };
    });
    return out;
}

} // namespace dacer
