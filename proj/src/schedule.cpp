#include "dacer/schedule.hpp"

#include <cmath>
#include <string>

#include "dacer/errors.hpp"

namespace dacer {

DiffusionSchedule::DiffusionSchedule(int T, std::vector<double> betas) : T_(T), beta_(std::move(betas)) {
    if (T < 1) throw ConfigError("schedule: T must be >= 1");
    if (static_cast<int>(beta_.size()) != T) throw ContractError("schedule: beta count != T");
    alpha_.resize(beta_.size());
    alpha_bar_.resize(beta_.size());
    double prod = 1.0;
    for (size_t i = 0; i < beta_.size(); ++i) {
        const double b = beta_[i];
        if (!(b > 0.0 && b < 1.0))
            throw ContractError("schedule: beta[" + std::to_string(i + 1) + "] = " +
                                std::to_string(b) + " is outside (0,1)");
        alpha_[i] = 1.0 - b;
        prod *= alpha_[i];
        alpha_bar_[i] = prod;
    }
}

double DiffusionSchedule::at(const std::vector<double>& v, int t) const {
    if (t < 1 || t > T_)
        throw ContractError("schedule: step " + std::to_string(t) + " outside 1.." +
                            std::to_string(T_));
    return v[static_cast<size_t>(t - 1)];
}

DiffusionSchedule make_schedule(int T) {
    if (T < 1) throw ConfigError("schedule: T must be >= 1, got " + std::to_string(T));
    std::vector<double> betas(static_cast<size_t>(T));
    const double Td = static_cast<double>(T);
    for (int t = 1; t <= T; ++t) {
        const double expo =
            -kScheduleBetaMin / Td -
            (kScheduleBetaMax - kScheduleBetaMin) * (2.0 * t - 1.0) / (2.0 * Td * Td);
        betas[static_cast<size_t>(t - 1)] = 1.0 - std::exp(expo);
    }
    return DiffusionSchedule(T, std::move(betas));
}

} // namespace dacer
