#include "twodelay/bifurcation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <thread>

#include "twodelay/errors.hpp"

namespace twodelay {

const char* to_string(RegimeKind kind) noexcept {
    switch (kind) {
        case RegimeKind::Equilibrium: return "Equilibrium";
        case RegimeKind::Periodic: return "Periodic";
        case RegimeKind::Chaotic: return "Chaotic";
        case RegimeKind::Unbounded: return "Unbounded";
    }
    return "?";
}

std::size_t count_clusters(std::span<const double> values, double eps) {
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    std::size_t n = 0;
    double start = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i == 0 || v[i] - start > eps) {
            ++n;
            start = v[i];
        }
    }
    return n;
}

Regime classify_regime(std::span<const double> samples, std::span<const double> tail,
                       const ClassifyOptions& opt, std::optional<double> lambda_max) {
    Regime r;
    if (tail.empty()) return r;
    const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
    const double extent = *hi - *lo;
    if (extent < opt.eps_eq || samples.empty()) {
        r.kind = RegimeKind::Equilibrium;
        r.equilibrium = std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(tail.size());
        return r;
    }
    r.clusters = count_clusters(samples, opt.cluster_fraction * extent);
    const bool many = r.clusters > opt.max_periodic_clusters;
    const bool confirmed = !lambda_max || *lambda_max > opt.chaos_lambda;
    r.kind = many && confirmed ? RegimeKind::Chaotic : RegimeKind::Periodic;
    return r;
}

SolverConfig default_sweep_config() {
    SolverConfig cfg;
    cfg.h = 0.01;
    cfg.transient = 3000.0;
    cfg.t_end = 4500.0;
    cfg.record_stride = 5;
    return cfg;
}

std::vector<double> default_tau2_grid() {
    std::vector<double> grid(600);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = 7.0 * static_cast<double>(i + 1) / 600.0;
    return grid;
}

namespace {

BifurcationRow sweep_row(ModelParams p, double tau2, const SolverConfig& cfg, const SweepOptions& opt) {
    BifurcationRow row;
    row.tau2 = tau2;
    p.tau2 = tau2;
    Trajectory traj;
    try {
        traj = integrate(p, HistorySpec::constant(0.01), cfg);
    } catch (const DivergenceError&) {
        row.regime.kind = RegimeKind::Unbounded;
        return row;
    }
    const auto tail = traj.post_transient();
    if (tail.size() >= 3) {
        for (const auto& e : local_extrema(traj, traj.transient_index)) row.samples.push_back(e.value);
    }
    std::sort(row.samples.begin(), row.samples.end());

    const Regime provisional = classify_regime(row.samples, tail, opt.classify);
    if (opt.lyapunov && provisional.kind != RegimeKind::Equilibrium) {
        const auto stride = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(opt.lyapunov_dt / traj.h_record)));
        std::vector<double> series;
        for (std::size_t i = 0; i < tail.size(); i += stride) series.push_back(tail[i]);
        try {
            row.lambda_max =
                largest_lyapunov(series, traj.h_record * static_cast<double>(stride), std::nullopt, opt.wolf)
                    .lambda_max;
        } catch (const AnalysisError&) {
            row.lambda_max.reset();
        }
    }
    row.regime = classify_regime(row.samples, tail, opt.classify, row.lambda_max);
    if (row.regime.kind == RegimeKind::Equilibrium) row.samples = {row.regime.equilibrium};
    return row;
}

}  // namespace

std::vector<BifurcationRow> sweep_tau2(const ModelParams& base, const std::vector<double>& tau2_grid,
                                       const SolverConfig& cfg, const SweepOptions& opt) {
    if (tau2_grid.empty()) throw ParameterError("tau2 grid is empty");
    if (!std::is_sorted(tau2_grid.begin(), tau2_grid.end())) {
        throw ParameterError("tau2 grid must be ascending");
    }
    for (double t : tau2_grid) {
        ModelParams p = base;
        p.tau2 = t;
        p.validate();
    }
    cfg.validate();

    std::vector<BifurcationRow> rows(tau2_grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < tau2_grid.size(); i = next++) {
            rows[i] = sweep_row(base, tau2_grid[i], cfg, opt);
        }
    };
    const std::size_t jobs = std::clamp<std::size_t>(opt.jobs, 1, tau2_grid.size());
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(jobs);
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    return rows;
}

void write_bifurcation_csv(std::ostream& os, const std::vector<BifurcationRow>& rows) {
    os << "tau2,sample\n" << std::setprecision(17);
    for (const auto& row : rows) {
        for (double s : row.samples) os << row.tau2 << ',' << s << '\n';
    }
}

void write_regime_csv(std::ostream& os, const std::vector<BifurcationRow>& rows) {
    os << "tau2,regime,n_clusters,lambda_max\n" << std::setprecision(17);
    for (const auto& row : rows) {
        os << row.tau2 << ',' << to_string(row.regime.kind) << ',' << row.regime.clusters << ',';
        if (row.lambda_max) {
            os << *row.lambda_max;
        } else {
            os << "nan";
        }
        os << '\n';
    }
}

}  // namespace twodelay
