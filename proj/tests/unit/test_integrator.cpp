#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "twodelay/dde_integrator.hpp"
#include "twodelay/errors.hpp"
#include "twodelay/stability.hpp"

using namespace twodelay;

namespace {

double sup_abs(std::span<const double> xs) {
    double m = 0.0;
    for (double x : xs) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_SUITE("integrator") {

TEST_CASE("solver config validation") {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.h = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
    cfg = {};
    cfg.t_end = cfg.h;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
    cfg = {};
    cfg.record_stride = 0;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
    cfg = {};
    cfg.transient = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("short delays trigger the step warning") {
    ModelParams p;
    CHECK_FALSE(step_guard_warning(p, 0.01));
    p.tau1 = 0.03;
    CHECK(step_guard_warning(p, 0.01));
    p.tau1 = 5.1;
    p.tau2 = 0.0;
    CHECK_FALSE(step_guard_warning(p, 0.01));
}

TEST_CASE("hermite lookup reproduces cubics") {
    const auto cubic = [](double t) { return 0.3 - 1.2 * t + 0.7 * t * t - 0.05 * t * t * t; };
    const auto slope = [](double t) { return -1.2 + 1.4 * t - 0.15 * t * t; };
    ScalarSolution sol(0.25, [](double) { return State<1>{0.3}; });
    for (int i = 0; i <= 40; ++i) {
        const double t = 0.25 * i;
        sol.push_node({cubic(t)});
        sol.set_derivative(static_cast<std::size_t>(i), {slope(t)});
    }
    for (double t = 0.0; t < 10.0; t += 0.0371) CHECK(sol(t)[0] == doctest::Approx(cubic(t)).epsilon(1e-12));

    ScalarSolution line(0.1, [](double) { return State<1>{0.0}; });
    line.push_node({0.0});
    line.push_node({0.1});
    line.set_derivative(0, {1.0});
    line.set_derivative(1, {1.0});
    CHECK(line(0.05)[0] == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("lookups at nodes, in the history and past the solution") {
    ModelParams p;
    SolverConfig cfg;
    cfg.t_end = 20.0;
    const auto sol = integrate_dense(p, HistorySpec::constant(0.01), cfg);
    CHECK(sol(-3.0)[0] == 0.01);
    CHECK(sol(-p.total_delay())[0] == 0.01);
    for (std::size_t i : {0u, 1u, 517u, 2000u}) {
        CHECK(sol(static_cast<double>(i) * cfg.h)[0] == sol.values()[i][0]);
    }
    CHECK_NOTHROW(sol(20.0));
    CHECK_THROWS_AS(sol(20.5), LookupError);
}

TEST_CASE("stable equilibrium at the origin for tau2 = 1") {
    ModelParams p;
    SolverConfig cfg;
    cfg.t_end = 2000.0;
    cfg.record_stride = 10;
    const auto traj = integrate(p, HistorySpec::constant(0.01), cfg);
    CHECK(std::abs(traj.xs.back()) < 1e-3);
    CHECK(traj.end_time() == doctest::Approx(2000.0));
}

TEST_CASE("nonzero equilibrium reached for tau2 = 2") {
    ModelParams p;
    p.tau2 = 2.0;
    SolverConfig cfg;
    cfg.t_end = 2000.0;
    cfg.record_stride = 10;
    const auto traj = integrate(p, HistorySpec::constant(0.01), cfg);
    CHECK(traj.xs.back() == doctest::Approx(1.7750).epsilon(1e-2 / 1.775));
}

TEST_CASE("zero history stays at zero") {
    for (double tau2 : {0.0, 1.0, 3.8, 5.4}) {
        ModelParams p;
        p.tau2 = tau2;
        p.k = 2.5;
        SolverConfig cfg;
        cfg.t_end = 100.0;
        const auto traj = integrate(p, HistorySpec::constant(0.0), cfg);
        CHECK(sup_abs(traj.xs) == 0.0);
    }
}

TEST_CASE("integer solver rejects fractional order") {
    ModelParams p;
    p.alpha = 0.5;
    CHECK_THROWS_AS(integrate(p, HistorySpec::constant(0.01), SolverConfig{}), ParameterError);
}

TEST_CASE("stride and transient index") {
    ModelParams p;
    SolverConfig cfg{0.01, 50.0, 10.0, 5};
    const auto traj = integrate(p, HistorySpec::constant(0.01), cfg);
    CHECK(traj.h_record == doctest::Approx(0.05));
    CHECK(traj.xs.size() == 1001);
    CHECK(traj.transient_index == 200);
    CHECK(traj.post_transient().size() == 801);
    CHECK(traj.at(10.0) == traj.xs[200]);
}

TEST_CASE("divergence reports the blow-up time") {
    ModelParams p;
    p.gamma = -1.0;
    SolverConfig cfg;
    cfg.t_end = 100.0;
    try {
        integrate(p, HistorySpec::constant(0.01), cfg);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        // Growth is at least e^t from 0.01, so 1e6 is passed before t = ln(1e8).
        CHECK(e.time() > 1.0);
        CHECK(e.time() < std::log(1e8) + 1.0);
    }
}

TEST_CASE("controlled runs") {
    ModelParams p;
    p.tau2 = 3.8;
    SolverConfig cfg;
    cfg.t_end = 3000.0;
    cfg.record_stride = 10;

    SUBCASE("gain above threshold suppresses the oscillation") {
        p.mu = 1.5;
        const auto traj = integrate_controlled(p, HistorySpec::constant(0.01), cfg);
        CHECK(std::abs(traj.xs.back()) < 1e-4);
    }
    SUBCASE("no gain keeps a bounded irregular oscillation") {
        const auto traj = integrate(p, HistorySpec::constant(0.01), cfg);
        const auto tail = std::span<const double>(traj.xs).subspan(traj.xs.size() / 2);
        CHECK(sup_abs(tail) > 0.5);
        CHECK(sup_abs(tail) < 20.0);
        CHECK(local_extrema(tail, 0.0, traj.h_record).size() > 100);
    }
    SUBCASE("gain below threshold leaves the neighbourhood of the origin") {
        p.mu = 1.03;
        const auto traj = integrate_controlled(p, HistorySpec::constant(0.01), cfg);
        const auto tail = std::span<const double>(traj.xs).subspan(traj.xs.size() / 2);
        CHECK(sup_abs(tail) > 0.01);
    }
    SUBCASE("controlled entry point requires a gain") {
        CHECK_THROWS_AS(integrate_controlled(p, HistorySpec::constant(0.01), cfg), ParameterError);
    }
}

TEST_CASE("extrema of a sampled sine") {
    std::vector<double> xs;
    for (int i = 0; i <= 2000; ++i) xs.push_back(std::sin(0.01 * i));
    const auto ex = local_extrema(xs, 0.0, 0.01);
    REQUIRE(ex.size() == 6);
    for (std::size_t i = 0; i < ex.size(); ++i) {
        CHECK(ex[i].is_max == (i % 2 == 0));
        CHECK(ex[i].value == doctest::Approx(ex[i].is_max ? 1.0 : -1.0).epsilon(1e-3));
        const double expected_t = std::numbers::pi / 2 + std::numbers::pi * static_cast<double>(i);
        CHECK(ex[i].time == doctest::Approx(expected_t).epsilon(0.01 / expected_t));
    }
}

TEST_CASE("extrema edge cases") {
    const std::vector<double> ramp{0.0, 1.0, 2.0, 3.0, 4.0};
    CHECK(local_extrema(ramp, 0.0, 1.0).empty());
    const std::vector<double> flat(10, 2.5);
    CHECK(local_extrema(flat, 0.0, 1.0).empty());
    const std::vector<double> plateau{0.0, 1.0, 1.0, 1.0, 0.0};
    const auto ex = local_extrema(plateau, 0.0, 1.0);
    REQUIRE(ex.size() == 1);
    CHECK(ex[0].is_max);
    CHECK(ex[0].time == doctest::Approx(2.0));
    const std::vector<double> step{0.0, 1.0, 1.0, 2.0};
    CHECK(local_extrema(step, 0.0, 1.0).empty());
    const std::vector<double> tiny{0.0, 1.0};
    CHECK_THROWS_AS(local_extrema(tiny, 0.0, 1.0), AnalysisError);

    Trajectory traj;
    traj.h_record = 0.5;
    traj.t0 = 1.0;
    traj.xs = {0.0, 2.0, 1.0, 3.0, 0.0};
    const auto from1 = local_extrema(traj, 1);
    REQUIRE(from1.size() == 2);
    CHECK(from1[0].time == doctest::Approx(2.0));
    CHECK_FALSE(from1[0].is_max);
    CHECK_THROWS_AS(local_extrema(traj, 3), AnalysisError);
}

TEST_CASE("trajectory csv") {
    Trajectory traj;
    traj.h_record = 0.1;
    traj.xs = {0.01, 1.0 / 3.0, -2.5};
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,x");
    std::getline(in, line);
    CHECK(line == "0,0.01");
    std::getline(in, line);
    const auto comma = line.find(',');
    CHECK(std::stod(line.substr(comma + 1)) == 1.0 / 3.0);
    CHECK(line.substr(comma + 1).size() >= 17);
    std::getline(in, line);
    CHECK(line == "0.20000000000000001,-2.5");
}

TEST_CASE("step halving shows fourth order convergence") {
    ModelParams p;
    p.tau2 = 1.0;
    const auto run = [&](double h) {
        SolverConfig cfg{h, 60.0, 0.0, 1};
        return integrate_dense(p, HistorySpec::constant(0.5), cfg);
    };
    const auto coarse = run(0.1), mid = run(0.05), fine = run(0.025);
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        e1 = std::max(e1, std::abs(coarse.values()[i][0] - mid.values()[2 * i][0]));
        e2 = std::max(e2, std::abs(mid.values()[2 * i][0] - fine.values()[4 * i][0]));
    }
    MESSAGE("halving ratio " << e1 / e2);
    CHECK(e2 > 0.0);
    CHECK(e1 / e2 > 8.0);
}

TEST_CASE("reruns are bit identical") {
    ModelParams p;
    p.tau2 = 5.4;
    SolverConfig cfg;
    cfg.t_end = 500.0;
    const auto a = integrate(p, HistorySpec::constant(0.01), cfg);
    const auto b = integrate(p, HistorySpec::constant(0.01), cfg);
    CHECK(a.xs == b.xs);
}

TEST_CASE("strong damping converges for any delays") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> k(-2.0, 2.0), margin(0.01, 1.0), tau(0.0, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        ModelParams p;
        p.k = k(rng);
        if (p.k == 0.0) p.k = 0.5;
        p.gamma = 2.0 * std::abs(p.k) + margin(rng);
        p.tau1 = tau(rng);
        p.tau2 = tau(rng);
        REQUIRE(check_delay_independent(p) == StabilityClass::StableAllDelays);
        SolverConfig cfg;
        cfg.t_end = std::min(50.0 / (p.gamma - 2.0 * std::abs(p.k)), 5000.0);
        cfg.record_stride = 100;
        const auto traj = integrate(p, HistorySpec::constant(0.01), cfg);
        INFO("k=" << p.k << " gamma=" << p.gamma << " tau1=" << p.tau1 << " tau2=" << p.tau2);
        CHECK(std::abs(traj.xs.back()) < 1e-4);
    }
}

}

TEST_SUITE("integrator") {

TEST_CASE("negative decay rate drives trajectories away from the origin") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> k(-2.0, 2.0), gamma(-1.0, -0.05), tau(0.0, 10.0);
    for (int trial = 0; trial < 10; ++trial) {
        ModelParams p;
        p.k = k(rng);
        p.gamma = gamma(rng);
        p.tau1 = tau(rng);
        p.tau2 = tau(rng);
        REQUIRE(check_delay_independent(p) == StabilityClass::UnstableAllDelays);
        SolverConfig cfg;
        cfg.t_end = std::min(50.0 / std::abs(p.gamma), 2000.0);
        cfg.record_stride = 10;
        INFO("k=" << p.k << " gamma=" << p.gamma << " tau1=" << p.tau1 << " tau2=" << p.tau2);
        double peak = 0.0;
        try {
            for (double x : integrate(p, HistorySpec::constant(0.01), cfg).xs) peak = std::max(peak, std::abs(x));
        } catch (const DivergenceError&) {
            peak = INFINITY;
        }
        CHECK(peak > 0.1);
    }
}

}
