#include "twodelay/fractional.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "twodelay/errors.hpp"
#include "twodelay/special.hpp"

namespace twodelay {

void FracSolverConfig::validate(const ModelParams& p) const {
    if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("step h must be > 0");
    if (!(t_end > h) || !std::isfinite(t_end)) throw ParameterError("t_end must exceed h");
    if (!(transient >= 0.0)) throw ParameterError("transient must be >= 0");
    if (record_stride < 1) throw ParameterError("record_stride must be >= 1");
    if (memory_window) {
        const double needed = 10.0 * std::max(p.total_delay(), 1.0) / h;
        if (static_cast<double>(*memory_window) < needed) {
            throw ParameterError("memory window of " + std::to_string(*memory_window) +
                                 " steps is below 10 * max(tau1 + tau2, 1) / h = " +
                                 std::to_string(static_cast<std::size_t>(std::ceil(needed))));
        }
    }
}

std::size_t FracSolverConfig::steps() const {
    return static_cast<std::size_t>(std::llround(t_end / h));
}

Trajectory integrate_frac(const ModelParams& p, const HistorySpec& hist, const FracSolverConfig& cfg) {
    p.validate();
    cfg.validate(p);
    hist.validate(p.total_delay());

    const double alpha = p.alpha;
    const double h = cfg.h;
    const std::size_t n_steps = cfg.steps();
    const std::size_t window = cfg.memory_window.value_or(n_steps + 1);

    std::vector<double> pow_a(n_steps + 3), pow_a1(n_steps + 3);
    for (std::size_t i = 0; i < pow_a.size(); ++i) {
        const double k = static_cast<double>(i);
        pow_a[i] = std::pow(k, alpha);
        pow_a1[i] = std::pow(k, alpha + 1.0);
    }
    // predictor[k] weights f_{n-k}; corrector[k] weights f_{n-k} for n - k >= 1.
    std::vector<double> predictor(n_steps + 1), corrector(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k) {
        predictor[k] = pow_a[k + 1] - pow_a[k];
        corrector[k] = pow_a1[k + 2] + pow_a1[k] - 2.0 * pow_a1[k + 1];
    }
    const double c_pred = std::pow(h, alpha) / lanczos_gamma(alpha + 1.0);
    const double c_corr = std::pow(h, alpha) / lanczos_gamma(alpha + 2.0);

    std::vector<double> x(n_steps + 1), f(n_steps + 1);
    const double x0 = hist(0.0);
    x[0] = x0;

    const double tau1 = p.tau1;
    const double tau12 = p.total_delay();
    // Linear lookup of x at td given solved nodes 0..last; td in (t_last, t_last + h] blends
    // toward the stage value y.
    auto lookup = [&](double td, std::size_t last, double y) {
        if (td < 0.0) return hist(td);
        const double s = td / h;
        const double whole = std::floor(s);
        const auto i = static_cast<std::size_t>(whole);
        const double w = s - whole;
        if (i >= last) {
            const double t_last = static_cast<double>(last) * h;
            return x[last] + (td - t_last) / h * (y - x[last]);
        }
        if (w < 1e-12) return x[i];
        return x[i] + w * (x[i + 1] - x[i]);
    };
    auto rhs = [&](double t, double state, std::size_t last) {
        const double xd1 = tau1 == 0.0 ? state : lookup(t - tau1, last, state);
        const double xd12 = tau12 == 0.0 ? state : lookup(t - tau12, last, state);
        return eval_rhs(state, xd1, xd12, p);
    };
    auto guard = [](double v, double t) {
        if (!std::isfinite(v) || std::abs(v) > 1e6) {
            throw DivergenceError(t, 0, "fractional solution diverged at t=" + std::to_string(t));
        }
    };
    guard(x0, 0.0);

    // Truncated memory: exact weights on the last `window` steps; older f values are kept as
    // block means over `block` steps, each multiplied by the block's telescoped weight sum.
    const std::size_t block = std::max<std::size_t>(1, window / 32);
    std::vector<double> block_mean;
    // Sum of predictor / corrector weights for j in [a, b], j >= 1 for the corrector.
    auto pred_block = [&](std::size_t n, std::size_t a, std::size_t b) {
        return pow_a[n - a + 1] - pow_a[n - b];
    };
    auto corr_block = [&](std::size_t n, std::size_t a, std::size_t b) {
        const std::size_t kl = n - b, kh = n - a;
        return (pow_a1[kh + 2] - pow_a1[kh + 1]) - (pow_a1[kl + 1] - pow_a1[kl]);
    };

    f[0] = rhs(0.0, x0, 0);
    for (std::size_t n = 0; n < n_steps; ++n) {
        const std::size_t j_min = n + 1 > window ? n + 1 - window : 0;
        // Whole blocks strictly before j_min are aggregated; the rest is summed exactly.
        const std::size_t n_blocks = j_min / block;
        const std::size_t j_exact = n_blocks * block;
        while (block_mean.size() < n_blocks) {
            const std::size_t b = block_mean.size();
            const std::size_t lo = std::max<std::size_t>(b * block, 1);
            const std::size_t hi = (b + 1) * block;
            double sum = 0.0;
            for (std::size_t j = lo; j < hi; ++j) sum += f[j];
            block_mean.push_back(hi > lo ? sum / static_cast<double>(hi - lo) : 0.0);
        }

        double pred_sum = 0.0;
        double corr_sum = 0.0;
        for (std::size_t b = 0; b < n_blocks; ++b) {
            const std::size_t lo = std::max<std::size_t>(b * block, 1);
            const std::size_t hi = (b + 1) * block - 1;
            if (hi < lo) continue;
            pred_sum += pred_block(n, lo, hi) * block_mean[b];
            corr_sum += corr_block(n, lo, hi) * block_mean[b];
        }
        for (std::size_t j = std::max<std::size_t>(j_exact, 1); j <= n; ++j) {
            pred_sum += predictor[n - j] * f[j];
            corr_sum += corrector[n - j] * f[j];
        }
        // f_0 carries its own corrector weight and is always summed exactly.
        pred_sum += predictor[n] * f[0];
        const double nd = static_cast<double>(n);
        corr_sum += (pow_a1[n] - (nd - alpha) * pow_a[n + 1]) * f[0];

        const double t_next = static_cast<double>(n + 1) * h;
        const double x_pred = x0 + c_pred * pred_sum;
        guard(x_pred, t_next);
        const double f_pred = rhs(t_next, x_pred, n);
        x[n + 1] = x0 + c_corr * (f_pred + corr_sum);
        guard(x[n + 1], t_next);
        f[n + 1] = rhs(t_next, x[n + 1], n + 1);
    }

    Trajectory traj;
    traj.t0 = 0.0;
    traj.h_record = h * static_cast<double>(cfg.record_stride);
    traj.params = p;
    for (std::size_t i = 0; i <= n_steps; i += cfg.record_stride) traj.xs.push_back(x[i]);
    traj.transient_index = std::min(
        traj.xs.size(), static_cast<std::size_t>(std::ceil(cfg.transient / traj.h_record - 1e-9)));
    return traj;
}

}  // namespace twodelay
