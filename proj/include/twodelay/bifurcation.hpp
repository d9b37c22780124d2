#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "twodelay/dde_integrator.hpp"
#include "twodelay/lyapunov.hpp"
#include "twodelay/model.hpp"

namespace twodelay {

enum class RegimeKind { Equilibrium, Periodic, Chaotic, Unbounded };

const char* to_string(RegimeKind kind) noexcept;

struct Regime {
    RegimeKind kind = RegimeKind::Unbounded;
    /// Tail mean for Equilibrium rows.
    double equilibrium = 0.0;
    /// Extrema clusters for Periodic and Chaotic rows.
    std::size_t clusters = 0;
};

struct ClassifyOptions {
    /// Tail peak-to-peak below this is an equilibrium.
    double eps_eq = 1e-4;
    /// Cluster diameter as a fraction of the tail extent.
    double cluster_fraction = 1e-2;
    std::size_t max_periodic_clusters = 16;
    /// An attached exponent must exceed this to confirm chaos.
    double chaos_lambda = 0.05;
};

/// Number of groups when sorted values are split greedily into runs of diameter <= eps.
std::size_t count_clusters(std::span<const double> values, double eps);

/// Equilibrium when the tail is flat to eps_eq or has no extrema; otherwise Periodic(n) for
/// n <= 16 extrema clusters and Chaotic beyond that. With an exponent attached, chaos
/// additionally needs lambda > chaos_lambda, else the row stays Periodic(n).
Regime classify_regime(std::span<const double> samples, std::span<const double> tail,
                       const ClassifyOptions& opt = {}, std::optional<double> lambda_max = std::nullopt);

struct BifurcationRow {
    double tau2 = 0.0;
    /// Sorted post-transient extrema; the single value x* for equilibrium rows.
    std::vector<double> samples;
    Regime regime;
    std::optional<double> lambda_max;
};

struct SweepOptions {
    ClassifyOptions classify;
    bool lyapunov = false;
    WolfOptions wolf;
    /// Sampling interval of the series handed to the Lyapunov estimator.
    double lyapunov_dt = 0.05;
    std::size_t jobs = 1;
};

/// Default sweep settings: h = 0.01, transient 3000, then a 1500-unit sampling window.
SolverConfig default_sweep_config();

/// 600 evenly spaced tau2 values on (0, 7].
std::vector<double> default_tau2_grid();

/// Integrates base with tau2 set to each grid value from history 0.01 and classifies the
/// post-transient attractor. Rows keep grid order; divergent rows are Unbounded.
std::vector<BifurcationRow> sweep_tau2(const ModelParams& base, const std::vector<double>& tau2_grid,
                                       const SolverConfig& cfg, const SweepOptions& opt = {});

/// One row per sample: `tau2,sample`.
void write_bifurcation_csv(std::ostream& os, const std::vector<BifurcationRow>& rows);
/// One row per tau2: `tau2,regime,n_clusters,lambda_max` (nan when no exponent).
void write_regime_csv(std::ostream& os, const std::vector<BifurcationRow>& rows);

}  // namespace twodelay
