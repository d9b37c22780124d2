#include "twodelay/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "twodelay/errors.hpp"

namespace twodelay {

namespace {

constexpr int kEquilibriumGridPoints = 10000;
constexpr int kMaxBisections = 400;

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw ParameterError(std::string(name) + " must be finite");
    }
}

}  // namespace

void ModelParams::validate() const {
    require_finite(gamma, "gamma");
    require_finite(k, "k");
    require_finite(tau1, "tau1");
    require_finite(tau2, "tau2");
    require_finite(alpha, "alpha");
    require_finite(mu, "mu");
    require_finite(delta, "delta");
    if (tau1 < 0.0) throw ParameterError("tau1 must be >= 0");
    if (tau2 < 0.0) throw ParameterError("tau2 must be >= 0");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in (0, 1]");
    if (mu < 0.0) throw ParameterError("mu must be >= 0");
}

double ModelParams::decay_weight() const noexcept { return std::exp(-gamma * tau2); }

HistorySpec HistorySpec::constant(double value) {
    require_finite(value, "history value");
    HistorySpec h;
    h.value_ = value;
    return h;
}

HistorySpec HistorySpec::sampled(std::vector<double> ts, std::vector<double> xs) {
    if (ts.size() != xs.size() || ts.size() < 2) {
        throw ParameterError("sampled history needs >= 2 (t, x) pairs of equal length");
    }
    for (std::size_t i = 0; i < ts.size(); ++i) {
        require_finite(ts[i], "history time");
        require_finite(xs[i], "history value");
        if (i > 0 && !(ts[i] > ts[i - 1])) {
            throw ParameterError("sampled history times must be strictly increasing");
        }
    }
    HistorySpec h;
    h.value_ = xs.back();
    h.ts_ = std::move(ts);
    h.xs_ = std::move(xs);
    return h;
}

double HistorySpec::operator()(double t) const {
    if (ts_.empty()) return value_;
    if (t <= ts_.front()) return xs_.front();
    if (t >= ts_.back()) return xs_.back();
    auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
    const auto hi = static_cast<std::size_t>(it - ts_.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - ts_[lo]) / (ts_[hi] - ts_[lo]);
    return xs_[lo] + w * (xs_[hi] - xs_[lo]);
}

void HistorySpec::validate(double span) const {
    if (ts_.empty()) return;
    if (ts_.front() > -span || ts_.back() < 0.0) {
        throw ParameterError("sampled history must span [-(tau1 + tau2), 0]");
    }
}

double HistorySpec::sup_abs() const noexcept {
    if (ts_.empty()) return std::abs(value_);
    double m = 0.0;
    for (double x : xs_) m = std::max(m, std::abs(x));
    return m;
}

double eval_rhs(double x_now, double x_d1, double x_d12, const ModelParams& p) noexcept {
    return -p.gamma * x_now + p.k * std::sin(x_d1) - p.k * p.decay_weight() * std::sin(x_d12) -
           p.mu * x_now;
}

double equilibrium_residual(double x, const ModelParams& p) noexcept {
    return -p.gamma * x + p.k * (1.0 - p.decay_weight()) * std::sin(x);
}

std::vector<double> find_equilibria(const ModelParams& p, std::pair<double, double> search_interval,
                                    double tol) {
    const auto [lo, hi] = search_interval;
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
        throw ParameterError("search interval must be finite with lo < hi");
    }
    if (!(tol > 0.0)) throw ParameterError("tol must be > 0");

    auto f = [&p](double x) { return equilibrium_residual(x, p); };

    std::vector<double> roots{0.0};
    const double step = (hi - lo) / (kEquilibriumGridPoints - 1);
    double x_prev = lo;
    double f_prev = f(x_prev);
    for (int i = 1; i < kEquilibriumGridPoints; ++i) {
        const double x = (i == kEquilibriumGridPoints - 1) ? hi : lo + i * step;
        const double fx = f(x);
        if (f_prev == 0.0) {
            roots.push_back(x_prev);
        } else if (fx != 0.0 && std::signbit(fx) != std::signbit(f_prev)) {
            double a = x_prev, b = x, fa = f_prev;
            double mid = 0.5 * (a + b);
            for (int it = 0; it < kMaxBisections; ++it) {
                mid = 0.5 * (a + b);
                const double fm = f(mid);
                if (std::abs(fm) < tol || mid == a || mid == b) break;
                if (std::signbit(fm) == std::signbit(fa)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            roots.push_back(mid);
        }
        x_prev = x;
        f_prev = fx;
    }
    if (f_prev == 0.0) roots.push_back(x_prev);

    std::sort(roots.begin(), roots.end());
    // The exact root 0 and its bisected neighbour collapse into one entry.
    std::vector<double> unique;
    for (double r : roots) {
        if (!unique.empty() && std::abs(r - unique.back()) < 0.5 * step) {
            if (r == 0.0) unique.back() = 0.0;
            continue;
        }
        unique.push_back(r);
    }
    return unique;
}

}  // namespace twodelay
