#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "twodelay/errors.hpp"

namespace twodelay {

template <std::size_t N>
using State = std::array<double, N>;

/// Cubic Hermite on [0, 1] from end values and end slopes already scaled by the segment width.
inline double hermite_unit(double x0, double x1, double d0, double d1, double theta) noexcept {
    const double t2 = theta * theta;
    const double t3 = t2 * theta;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + theta;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * x0 + h10 * d0 + h01 * x1 + h11 * d1;
}

/// Uniform-grid solution of an N-dimensional delay system: node values, node derivatives and
/// the history function for t < 0. Lookups between nodes use cubic Hermite interpolation.
template <std::size_t N>
class DenseSolution {
public:
    using History = std::function<State<N>(double)>;

    DenseSolution(double h, History history) : h_(h), history_(std::move(history)) {}

    double step() const noexcept { return h_; }
    std::size_t size() const noexcept { return values_.size(); }
    double last_time() const noexcept {
        return values_.empty() ? 0.0 : static_cast<double>(values_.size() - 1) * h_;
    }

    const std::vector<State<N>>& values() const noexcept { return values_; }
    const std::vector<State<N>>& derivatives() const noexcept { return derivs_; }

    void reserve(std::size_t n) {
        values_.reserve(n);
        derivs_.reserve(n);
    }
    void push_node(const State<N>& x) {
        values_.push_back(x);
        derivs_.push_back(State<N>{});
    }
    void set_derivative(std::size_t i, const State<N>& d) { derivs_[i] = d; }

    State<N> history(double t) const { return history_(t); }

    /// Solution at t. History for t < 0, exact node values on grid times, Hermite otherwise.
    /// Derivatives of both bracketing nodes must be set.
    State<N> operator()(double t) const {
        if (t < 0.0) return history_(t);
        if (values_.empty()) throw LookupError("lookup into an empty solution");
        const double s = t / h_;
        const double last = static_cast<double>(values_.size() - 1);
        if (s > last + kSnap) {
            throw LookupError("lookup at t=" + std::to_string(t) + " beyond solved time " +
                              std::to_string(last_time()));
        }
        double whole = std::floor(s);
        double theta = s - whole;
        if (theta < kSnap) return values_[static_cast<std::size_t>(whole)];
        if (theta > 1.0 - kSnap) return values_[static_cast<std::size_t>(whole) + 1];
        const auto i = static_cast<std::size_t>(whole);
        State<N> out{};
        for (std::size_t c = 0; c < N; ++c) {
            out[c] = hermite_unit(values_[i][c], values_[i + 1][c], h_ * derivs_[i][c],
                                  h_ * derivs_[i + 1][c], theta);
        }
        return out;
    }

private:
    static constexpr double kSnap = 1e-9;

    double h_;
    History history_;
    std::vector<State<N>> values_;
    std::vector<State<N>> derivs_;
};

struct StepperOptions {
    double h = 0.01;
    std::size_t steps = 0;
    double divergence_bound = 1e6;
};

/// Fixed-step classical RK4 method of steps for
///   x'(t) = rhs(x(t), x(t - delay1), x(t - delay2)).
/// Each stage reads its delayed states from the dense solution. A delayed time inside the
/// current step (delay < h) is linearly blended between the last node and the stage state;
/// a zero delay uses the stage state itself.
template <std::size_t N, class Rhs>
DenseSolution<N> integrate_method_of_steps(const Rhs& rhs, typename DenseSolution<N>::History history,
                                           double delay1, double delay2, const StepperOptions& opt) {
    DenseSolution<N> sol(opt.h, std::move(history));
    sol.reserve(opt.steps + 1);
    const double h = opt.h;

    auto delayed = [&sol](double t_stage, const State<N>& y_stage, double delay, double t_node,
                          const State<N>& x_node) -> State<N> {
        if (delay == 0.0) return y_stage;
        const double td = t_stage - delay;
        State<N> out;
        if (td > t_node) {
            const double w = (td - t_node) / (t_stage - t_node);
            for (std::size_t c = 0; c < N; ++c) out[c] = x_node[c] + w * (y_stage[c] - x_node[c]);
            return out;
        }
        const double h = sol.step();
        if (delay < h && td > 0.0 && td > t_node - h) {
            // The node at t_node has no derivative yet while k1 is being formed.
            const std::size_t n = sol.size() - 1;
            const State<N>& a = sol.values()[n - 1];
            const State<N>& b = sol.values()[n];
            const double w = (td - (t_node - h)) / h;
            for (std::size_t c = 0; c < N; ++c) out[c] = a[c] + w * (b[c] - a[c]);
            return out;
        }
        return sol(td);
    };
    auto stage = [&](double t_stage, const State<N>& y, double t_node, const State<N>& x_node) {
        return rhs(y, delayed(t_stage, y, delay1, t_node, x_node),
                   delayed(t_stage, y, delay2, t_node, x_node));
    };
    auto check = [&opt](const State<N>& x, double t) {
        for (std::size_t c = 0; c < N; ++c) {
            if (!std::isfinite(x[c]) || std::abs(x[c]) > opt.divergence_bound) {
                throw DivergenceError(t, static_cast<int>(c),
                                      "solution diverged at t=" + std::to_string(t) +
                                          " (component " + std::to_string(c) + ")");
            }
        }
    };

    State<N> x = sol.history(0.0);
    check(x, 0.0);
    sol.push_node(x);
    for (std::size_t n = 0; n < opt.steps; ++n) {
        const double t = static_cast<double>(n) * h;
        // t_node for the in-step blend is the start of the step; at a stage time equal to t_node
        // (k1) the lookup never reaches the blend branch.
        const State<N> k1 = stage(t, x, t, x);
        sol.set_derivative(n, k1);
        State<N> y;
        for (std::size_t c = 0; c < N; ++c) y[c] = x[c] + 0.5 * h * k1[c];
        const State<N> k2 = stage(t + 0.5 * h, y, t, x);
        for (std::size_t c = 0; c < N; ++c) y[c] = x[c] + 0.5 * h * k2[c];
        const State<N> k3 = stage(t + 0.5 * h, y, t, x);
        for (std::size_t c = 0; c < N; ++c) y[c] = x[c] + h * k3[c];
        const State<N> k4 = stage(t + h, y, t, x);
        for (std::size_t c = 0; c < N; ++c) {
            x[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        check(x, t + h);
        sol.push_node(x);
    }
    const double t_last = static_cast<double>(opt.steps) * h;
    sol.set_derivative(opt.steps, stage(t_last, x, t_last, x));
    return sol;
}

}  // namespace twodelay
