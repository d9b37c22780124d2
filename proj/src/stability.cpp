#include "twodelay/stability.hpp"

#include <cmath>

#include "twodelay/errors.hpp"

namespace twodelay {

namespace {

constexpr int kOmegaGridPoints = 100000;
constexpr double kGainTie = 1e-6;

double bisect_defect(double a, double b, double fa, const ModelParams& p) {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid == a || mid == b) break;
        const double fm = crossing_defect(mid, p);
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(fa)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

const char* to_string(StabilityClass c) noexcept {
    switch (c) {
        case StabilityClass::StableAllDelays: return "StableAllDelays";
        case StabilityClass::UnstableAllDelays: return "UnstableAllDelays";
        case StabilityClass::Indeterminate: return "Indeterminate";
    }
    return "?";
}

StabilityClass check_delay_independent(const ModelParams& p) noexcept {
    if (p.gamma > 2.0 * std::abs(p.k)) return StabilityClass::StableAllDelays;
    if (p.gamma < 0.0) return StabilityClass::UnstableAllDelays;
    return StabilityClass::Indeterminate;
}

std::complex<double> char_residual(std::complex<double> lambda, const ModelParams& p) noexcept {
    return lambda + (p.gamma + p.mu) - p.k * std::exp(-lambda * p.tau1) +
           p.k * p.decay_weight() * std::exp(-lambda * p.total_delay());
}

double crossing_defect(double omega, const ModelParams& p) noexcept {
    return omega + p.k * std::sin(omega * p.tau1) -
           p.k * p.decay_weight() * std::sin(omega * p.total_delay());
}

double gain_at_crossing(double omega, const ModelParams& p) noexcept {
    return -p.gamma + p.k * std::cos(omega * p.tau1) -
           p.k * p.decay_weight() * std::cos(omega * p.total_delay());
}

std::optional<CriticalGain> find_critical_gain(const ModelParams& p, double omega_max) {
    if (!(omega_max > 0.0) || !std::isfinite(omega_max)) {
        throw ParameterError("omega_max must be > 0");
    }
    std::optional<CriticalGain> best;
    auto consider = [&](double omega) {
        const double mu = gain_at_crossing(omega, p);
        if (!(mu > 0.0)) return;
        if (best && mu <= best->mu_star + kGainTie) return;
        ModelParams at = p;
        at.mu = mu;
        const double real_eq = -mu - p.gamma + p.k * std::cos(omega * p.tau1) -
                               p.k * p.decay_weight() * std::cos(omega * p.total_delay());
        best = CriticalGain{mu, omega, std::abs(real_eq) + std::abs(crossing_defect(omega, at))};
    };

    // omega = 0 solves the imaginary-part equation for every parameter set.
    consider(0.0);
    const double dw = omega_max / kOmegaGridPoints;
    double w_prev = dw;
    double f_prev = crossing_defect(w_prev, p);
    if (f_prev == 0.0) consider(w_prev);
    for (int i = 2; i <= kOmegaGridPoints; ++i) {
        const double w = dw * i;
        const double f = crossing_defect(w, p);
        if (f == 0.0) {
            consider(w);
        } else if (f_prev != 0.0 && std::signbit(f) != std::signbit(f_prev)) {
            consider(bisect_defect(w_prev, w, f_prev, p));
        }
        w_prev = w;
        f_prev = f;
    }
    return best;
}

bool check_sync_condition(const ModelParams& p, double delta) noexcept {
    return p.gamma + delta > 2.0 * std::abs(p.k);
}

Trajectory simulate_comparison(const ModelParams& p, double delta, double z0, const SolverConfig& cfg) {
    p.validate();
    cfg.validate();
    if (!std::isfinite(delta) || !std::isfinite(z0)) {
        throw ParameterError("delta and z0 must be finite");
    }
    const double decay = p.gamma + delta;
    const double ak = std::abs(p.k);
    auto rhs = [decay, ak](const State<1>& z, const State<1>& zd1, const State<1>& zd12) {
        return State<1>{-decay * z[0] + ak * zd1[0] + ak * zd12[0]};
    };
    StepperOptions opt;
    opt.h = cfg.h;
    opt.steps = cfg.steps();
    auto sol = integrate_method_of_steps<1>(
        rhs, [z0](double) { return State<1>{z0}; }, p.tau1, p.total_delay(), opt);
    ModelParams rec = p;
    rec.delta = delta;
    return make_trajectory(sol, rec, cfg);
}

}  // namespace twodelay
