#pragma once

#include <complex>
#include <optional>

#include "twodelay/dde_integrator.hpp"
#include "twodelay/model.hpp"

namespace twodelay {

enum class StabilityClass { StableAllDelays, UnstableAllDelays, Indeterminate };

const char* to_string(StabilityClass c) noexcept;

/// Delay-independent classification of the origin: stable for every tau1, tau2 >= 0 when
/// gamma > 2|k|, unstable for every delay when gamma < 0.
StabilityClass check_delay_independent(const ModelParams& p) noexcept;

/// lambda + (gamma + mu) - k e^{-lambda tau1} + k e^{-gamma tau2} e^{-lambda (tau1 + tau2)}
std::complex<double> char_residual(std::complex<double> lambda, const ModelParams& p) noexcept;

struct CriticalGain {
    double mu_star = 0.0;
    /// Crossing frequency; 0 marks a real root crossing through lambda = 0.
    double omega_star = 0.0;
    /// |real-part equation| + |imaginary-part defect| at (mu_star, omega_star).
    double residual = 0.0;
};

/// Imaginary-part defect omega + k sin(omega tau1) - k e^{-gamma tau2} sin(omega (tau1 + tau2)).
double crossing_defect(double omega, const ModelParams& p) noexcept;

/// Gain placing a characteristic root at i*omega (real-part equation solved for mu).
double gain_at_crossing(double omega, const ModelParams& p) noexcept;

/// Smallest control gain above which no characteristic root reaches the imaginary axis.
///
/// Candidate crossings are omega = 0 (a real root through the origin) and every root of
/// crossing_defect on (0, omega_max], located on a 1e5-point grid and refined by bisection.
/// The largest positive gain among them is returned; ties within 1e-6 keep the lowest omega.
/// nullopt when no candidate gain is positive (the "no threshold" outcome).
std::optional<CriticalGain> find_critical_gain(const ModelParams& p, double omega_max = 10.0);

/// Sufficient master/slave synchronization condition gamma + delta > 2|k|.
bool check_sync_condition(const ModelParams& p, double delta) noexcept;

/// Linear comparison system
///   z'(t) = -(gamma + delta) z(t) + |k| z(t - tau1) + |k| z(t - tau1 - tau2)
/// from constant history z0, with the integrator's RK4 method of steps.
Trajectory simulate_comparison(const ModelParams& p, double delta, double z0, const SolverConfig& cfg);

}  // namespace twodelay
