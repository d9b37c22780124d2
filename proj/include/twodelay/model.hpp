#pragma once

#include <utility>
#include <vector>

namespace twodelay {

/// Parameters of
///   x'(t) = -gamma x(t) + k sin x(t - tau1) - k e^{-gamma tau2} sin x(t - tau1 - tau2) - mu x(t)
/// and of its Caputo fractional (order alpha) and master/slave (gain delta) variants.
struct ModelParams {
    double gamma = 0.1;
    double k = 1.0;
    double tau1 = 5.1;
    double tau2 = 1.0;
    double alpha = 1.0;
    double mu = 0.0;
    double delta = 0.0;

    /// Throws ParameterError naming the first violated invariant.
    void validate() const;

    double total_delay() const noexcept { return tau1 + tau2; }
    /// The e^{-gamma tau2} weight of the second feedback term.
    double decay_weight() const noexcept;
};

/// Prescribed solution on [-(tau1 + tau2), 0].
class HistorySpec {
public:
    static HistorySpec constant(double value);
    /// Piecewise-linear history through (t, x) samples; t strictly increasing.
    static HistorySpec sampled(std::vector<double> ts, std::vector<double> xs);

    bool is_constant() const noexcept { return ts_.empty(); }
    double constant_value() const noexcept { return value_; }

    /// Evaluates the history at t <= 0. Sampled histories clamp outside their span.
    double operator()(double t) const;

    /// Throws ParameterError when a sampled grid does not cover [-span, 0].
    void validate(double span) const;

    /// Largest |x| over the history.
    double sup_abs() const noexcept;

private:
    HistorySpec() = default;

    double value_ = 0.0;
    std::vector<double> ts_;
    std::vector<double> xs_;
};

/// Right-hand side of the (optionally controlled) model at one instant.
/// x_d1 = x(t - tau1), x_d12 = x(t - tau1 - tau2).
double eval_rhs(double x_now, double x_d1, double x_d12, const ModelParams& p) noexcept;

/// Residual of the equilibrium condition -gamma x + k (1 - e^{-gamma tau2}) sin x.
double equilibrium_residual(double x, const ModelParams& p) noexcept;

/// All sign-change roots of the equilibrium condition in [lo, hi], sorted, always including 0.
std::vector<double> find_equilibria(const ModelParams& p, std::pair<double, double> search_interval,
                                    double tol = 1e-10);

}  // namespace twodelay
