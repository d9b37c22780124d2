#include "twodelay/dde_integrator.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "twodelay/errors.hpp"

namespace twodelay {

void SolverConfig::validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("step h must be > 0");
    if (!(t_end > h) || !std::isfinite(t_end)) throw ParameterError("t_end must exceed h");
    if (!(transient >= 0.0)) throw ParameterError("transient must be >= 0");
    if (record_stride < 1) throw ParameterError("record_stride must be >= 1");
}

std::size_t SolverConfig::steps() const {
    return static_cast<std::size_t>(std::llround(t_end / h));
}

std::optional<std::string> step_guard_warning(const ModelParams& p, double h) {
    const double shortest = std::min(p.tau1, p.tau2);
    if (p.tau1 > 0.0 && p.tau2 > 0.0 && h > shortest / 4.0) {
        std::ostringstream os;
        os << "step h=" << h << " exceeds min(tau1, tau2)/4=" << shortest / 4.0
           << "; delayed lookups inside a step are blended linearly";
        return os.str();
    }
    return std::nullopt;
}

double Trajectory::at(double t) const noexcept {
    if (xs.empty()) return 0.0;
    const double s = std::round((t - t0) / h_record);
    if (s <= 0.0) return xs.front();
    const auto i = static_cast<std::size_t>(s);
    return i >= xs.size() ? xs.back() : xs[i];
}

ScalarSolution integrate_dense(const ModelParams& p, const HistorySpec& hist, const SolverConfig& cfg) {
    p.validate();
    cfg.validate();
    if (p.alpha != 1.0) {
        throw ParameterError("alpha != 1 requires the fractional integrator");
    }
    hist.validate(p.total_delay());

    const double gamma_mu = p.gamma + p.mu;
    const double k = p.k;
    const double kw = p.k * p.decay_weight();
    auto rhs = [gamma_mu, k, kw](const State<1>& x, const State<1>& xd1, const State<1>& xd12) {
        return State<1>{-gamma_mu * x[0] + k * std::sin(xd1[0]) - kw * std::sin(xd12[0])};
    };
    StepperOptions opt;
    opt.h = cfg.h;
    opt.steps = cfg.steps();
    return integrate_method_of_steps<1>(
        rhs, [hist](double t) { return State<1>{hist(t)}; }, p.tau1, p.total_delay(), opt);
}

Trajectory make_trajectory(const ScalarSolution& sol, const ModelParams& p, const SolverConfig& cfg) {
    Trajectory traj;
    traj.t0 = 0.0;
    traj.h_record = cfg.h * static_cast<double>(cfg.record_stride);
    traj.params = p;
    const auto& values = sol.values();
    traj.xs.reserve(values.size() / cfg.record_stride + 1);
    for (std::size_t i = 0; i < values.size(); i += cfg.record_stride) traj.xs.push_back(values[i][0]);
    traj.transient_index = std::min(
        traj.xs.size(), static_cast<std::size_t>(std::ceil(cfg.transient / traj.h_record - 1e-9)));
    return traj;
}

Trajectory integrate(const ModelParams& p, const HistorySpec& hist, const SolverConfig& cfg) {
    return make_trajectory(integrate_dense(p, hist, cfg), p, cfg);
}

Trajectory integrate_controlled(const ModelParams& p, const HistorySpec& hist, const SolverConfig& cfg) {
    if (!(p.mu > 0.0)) throw ParameterError("controlled integration needs mu > 0");
    return integrate(p, hist, cfg);
}

std::vector<Extremum> local_extrema(std::span<const double> xs, double t0, double h) {
    if (xs.size() < 3) throw AnalysisError("local_extrema needs at least 3 samples");
    std::vector<Extremum> out;
    std::size_t i = 1;
    while (i + 1 < xs.size()) {
        // [i, j) is a run of equal values starting at i.
        std::size_t j = i + 1;
        while (j < xs.size() && xs[j] == xs[i]) ++j;
        if (j >= xs.size()) break;
        const double left = xs[i - 1];
        const double right = xs[j];
        const double v = xs[i];
        const double mid = 0.5 * static_cast<double>(i + j - 1);
        if (v > left && v > right) {
            out.push_back({t0 + mid * h, v, true});
        } else if (v < left && v < right) {
            out.push_back({t0 + mid * h, v, false});
        }
        i = j;
    }
    return out;
}

std::vector<Extremum> local_extrema(const Trajectory& traj, std::size_t from_index) {
    if (from_index >= traj.xs.size() || traj.xs.size() - from_index < 3) {
        throw AnalysisError("local_extrema needs at least 3 samples after the start index");
    }
    return local_extrema(std::span<const double>(traj.xs).subspan(from_index), traj.time(from_index),
                         traj.h_record);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,x\n" << std::setprecision(17);
    for (std::size_t i = 0; i < traj.xs.size(); ++i) os << traj.time(i) << ',' << traj.xs[i] << '\n';
}

}  // namespace twodelay
