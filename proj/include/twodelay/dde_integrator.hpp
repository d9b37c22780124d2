#pragma once

#include <algorithm>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twodelay/method_of_steps.hpp"
#include "twodelay/model.hpp"

namespace twodelay {

struct SolverConfig {
    double h = 0.01;
    double t_end = 1000.0;
    double transient = 0.0;
    std::size_t record_stride = 1;

    void validate() const;
    std::size_t steps() const;
};

/// Warning text when a positive delay is shorter than four steps, otherwise nullopt.
std::optional<std::string> step_guard_warning(const ModelParams& p, double h);

/// Uniformly sampled scalar solution: xs[i] is x(t0 + i * h_record).
struct Trajectory {
    double t0 = 0.0;
    double h_record = 0.01;
    std::vector<double> xs;
    ModelParams params;
    std::size_t transient_index = 0;

    double time(std::size_t i) const noexcept { return t0 + static_cast<double>(i) * h_record; }
    double end_time() const noexcept { return time(xs.empty() ? 0 : xs.size() - 1); }
    std::span<const double> post_transient() const noexcept {
        return std::span<const double>(xs).subspan(std::min(transient_index, xs.size()));
    }
    /// Sample nearest to time t (clamped to the record).
    double at(double t) const noexcept;
};

using ScalarSolution = DenseSolution<1>;

/// RK4 method-of-steps solution keeping the full internal grid for dense lookups.
ScalarSolution integrate_dense(const ModelParams& p, const HistorySpec& hist, const SolverConfig& cfg);

/// Integer-order integration (alpha must be 1). The mu term is active when p.mu > 0.
Trajectory integrate(const ModelParams& p, const HistorySpec& hist, const SolverConfig& cfg);

/// Same as integrate; requires mu > 0.
Trajectory integrate_controlled(const ModelParams& p, const HistorySpec& hist, const SolverConfig& cfg);

/// Builds a Trajectory by subsampling a dense scalar solution.
Trajectory make_trajectory(const ScalarSolution& sol, const ModelParams& p, const SolverConfig& cfg);

struct Extremum {
    double time;
    double value;
    bool is_max;
};

/// Strict interior extrema by three-point comparison from from_index on.
/// A flat run bounded by a rise and a fall counts once at its midpoint.
std::vector<Extremum> local_extrema(const Trajectory& traj, std::size_t from_index);
std::vector<Extremum> local_extrema(std::span<const double> xs, double t0, double h);

/// `t,x` CSV with 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace twodelay
