#pragma once

#include <cstddef>
#include <optional>

#include "twodelay/dde_integrator.hpp"
#include "twodelay/model.hpp"

namespace twodelay {

struct FracSolverConfig {
    double h = 0.005;
    double t_end = 200.0;
    /// Steps of memory kept at full resolution; nullopt keeps the full Caputo memory. Older
    /// memory is compressed into blocks of window / 32 steps rather than dropped.
    std::optional<std::size_t> memory_window;
    double transient = 0.0;
    std::size_t record_stride = 1;

    /// Also enforces window >= 10 max(tau1 + tau2, 1) / h for truncated memory.
    void validate(const ModelParams& p) const;
    std::size_t steps() const;
};

/// Caputo order-alpha integration of the model (the mu term included) by the
/// Adams-Bashforth-Moulton predictor-corrector: fractional rectangle predictor, fractional
/// trapezoid corrector, one corrector pass per step. The memory integral starts at t = 0;
/// history values enter only through the delayed lookups, which interpolate the stored grid
/// linearly.
Trajectory integrate_frac(const ModelParams& p, const HistorySpec& hist, const FracSolverConfig& cfg);

}  // namespace twodelay
