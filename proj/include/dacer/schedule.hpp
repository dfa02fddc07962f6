#pragma once

#include <vector>

namespace dacer {

// Per-step denoising constants, 1-indexed by step t = 1..T.
class DiffusionSchedule {
  public:
    DiffusionSchedule() = default;
    DiffusionSchedule(int T, std::vector<double> betas);

    int T() const { return T_; }
    double beta(int t) const { return at(beta_, t); }
    double alpha(int t) const { return at(alpha_, t); }
    double alpha_bar(int t) const { return at(alpha_bar_, t); }

  private:
    double at(const std::vector<double>& v, int t) const;

    int T_ = 0;
    std::vector<double> beta_, alpha_, alpha_bar_;
};

// Variance-preserving exponential discretization:
//   beta_t = 1 - exp(-beta_min/T - (beta_max - beta_min) * (2t-1) / (2 T^2))
// with beta_min = 0.1, beta_max = 10. By construction the cumulative product
// alpha_bar_T = exp(-(beta_min + beta_max)/2) ~ 0.0064 regardless of T, so the
// chain always starts from (almost) pure noise.
DiffusionSchedule make_schedule(int T);

inline constexpr double kScheduleBetaMin = 0.1;
inline constexpr double kScheduleBetaMax = 10.0;

} // namespace dacer
