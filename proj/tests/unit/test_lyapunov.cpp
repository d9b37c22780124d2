#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "twodelay/errors.hpp"
#include "twodelay/lyapunov.hpp"

using namespace twodelay;

namespace {

/// Post-transient series of the k = 1 family sampled every 0.05 time units.
std::vector<double> attractor_series(double tau2, double window = 3000.0) {
    ModelParams p;
    p.tau2 = tau2;
    const SolverConfig cfg{0.01, 3000.0 + window, 3000.0, 5};
    const auto traj = integrate(p, HistorySpec::constant(0.01), cfg);
    const auto tail = traj.post_transient();
    return {tail.begin(), tail.end()};
}

std::vector<double> sampled_sine(double freq, std::size_t n, double dt) {
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = std::sin(freq * dt * static_cast<double>(i));
    return xs;
}

}  // namespace

TEST_SUITE("lyapunov") {

TEST_CASE("delay embedding layout") {
    const std::vector<double> s{1, 2, 3, 4, 5};
    const auto pts = embed(s, {2, 1, 0});
    REQUIRE(pts.size() == 4);
    CHECK(pts[0] == std::vector<double>{1, 2});
    CHECK(pts[3] == std::vector<double>{4, 5});

    const auto ident = embed(s, {1, 1, 0});
    REQUIRE(ident.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(ident[i] == std::vector<double>{s[i]});

    std::vector<double> longer(37);
    for (std::size_t i = 0; i < longer.size(); ++i) longer[i] = static_cast<double>(i);
    const auto pts3 = embed(longer, {3, 2, 0});
    CHECK(pts3.size() == longer.size() - 4);
    CHECK(pts3[5] == std::vector<double>{5, 7, 9});

    const Embedding emb(longer, 3, 2);
    CHECK(emb.size() == 33);
    CHECK(emb.point(5)[2] == 9.0);
    CHECK(emb.distance(0, 1) == doctest::Approx(std::sqrt(3.0)));

    CHECK_THROWS_AS(embed(std::vector<double>{1, 2, 3}, {3, 1, 0}), AnalysisError);
    CHECK_THROWS_AS(embed(s, {0, 1, 0}), ParameterError);
    CHECK_THROWS_AS(embed(s, {2, 0, 0}), ParameterError);
}

TEST_CASE("mutual information agrees with a direct histogram") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<double> s(4000);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(0.07 * i) + noise(rng);
    for (std::size_t lag : {1u, 7u, 30u}) {
        CHECK(mutual_information(s, lag, 16) == doctest::Approx(oracle::mutual_information(s, lag, 16)).epsilon(1e-12));
    }
}

namespace {

std::size_t oracle_first_minimum(const std::vector<double>& s, std::size_t max_lag) {
    std::vector<double> mi(max_lag + 2);
    for (std::size_t l = 0; l <= max_lag + 1; ++l) mi[l] = oracle::mutual_information(s, l, 16);
    for (std::size_t l = 1; l <= max_lag; ++l) {
        if (mi[l] < mi[l - 1] && mi[l] <= mi[l + 1]) return l;
    }
    return max_lag;
}

}  // namespace

TEST_CASE("first mutual information minimum of a sine") {
    SUBCASE("noiseless samples follow the direct histogram") {
        // The sampled curve cuts the rank-bin grid differently at odd and even lags, so the
        // estimate alternates and its first dip sits at lag 1.
        const auto s = sampled_sine(0.1, 5000, 1.0);
        CHECK(mutual_information_lag(s, 100, 16) == oracle_first_minimum(s, 100));
    }
    SUBCASE("noisy samples dip near a quarter period") {
        std::mt19937_64 rng(2);
        std::normal_distribution<double> noise(0.0, 0.2);
        auto s = sampled_sine(0.1, 5000, 1.0);
        for (double& x : s) x += noise(rng);
        const std::size_t lag = mutual_information_lag(s, 100, 16);
        CHECK(lag == oracle_first_minimum(s, 100));
        CHECK(lag >= 13);
        CHECK(lag <= 19);
    }
}

TEST_CASE("noise returns some lag in range") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> s(3000);
    for (double& x : s) x = u(rng);
    const std::size_t lag = mutual_information_lag(s, 50, 16);
    CHECK(lag >= 1);
    CHECK(lag <= 50);
}

TEST_CASE("mutual information rejects degenerate input") {
    CHECK_THROWS_AS(mutual_information_lag(std::vector<double>(1000, 0.3), 20, 16), AnalysisError);
    CHECK_THROWS_AS(mutual_information_lag(sampled_sine(0.1, 100, 1.0), 20, 16), AnalysisError);
    CHECK_THROWS_AS(mutual_information_lag(sampled_sine(0.1, 1000, 1.0), 0, 16), ParameterError);
}

TEST_CASE("false nearest neighbours") {
    SUBCASE("sine unfolds in two dimensions") {
        const auto s = sampled_sine(0.1, 5000, 1.0);
        const auto r = false_nearest_neighbors(s, 16, 6);
        CHECK(r.dim == 2);
        CHECK_FALSE(r.saturated);
        CHECK(r.fractions[0] > 0.01);
    }
    SUBCASE("monotone ramp needs one dimension") {
        std::vector<double> ramp(2000);
        for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.001 * static_cast<double>(i);
        CHECK(false_nearest_neighbors(ramp, 1, 5).dim == 1);
    }
    SUBCASE("double-scroll series needs a few dimensions") {
        const auto s = attractor_series(5.4);
        const std::size_t lag = mutual_information_lag(s, 200, 16);
        const auto a = false_nearest_neighbors(s, lag, 10);
        const auto b = false_nearest_neighbors(s, lag, 10);
        CHECK(a.dim >= 3);
        CHECK(a.dim <= 8);
        CHECK(a.dim == b.dim);
        CHECK(a.fractions == b.fractions);
    }
}

TEST_CASE("stable regime has a negative exponent") {
    const auto r = largest_lyapunov(attractor_series(1.0), 0.05, std::nullopt);
    CHECK(r.lambda_max < 0.0);
    CHECK(r.n_points > 100);
}

TEST_CASE("double-scroll regime has a clearly positive exponent") {
    const auto s = attractor_series(5.4);
    const auto r = largest_lyapunov(s, 0.05, std::nullopt);
    MESSAGE("lambda_max at tau2 = 5.4: " << r.lambda_max);
    CHECK(r.lambda_max > 0.05);
    CHECK(r.embedding.theiler == 4 * r.embedding.lag);
    CHECK(r.renormalizations > 1000);

    SUBCASE("invariant under positive rescaling") {
        std::vector<double> scaled(s);
        for (double& x : scaled) x *= 37.5;
        const auto rs = largest_lyapunov(scaled, 0.05, r.embedding);
        CHECK(std::abs(rs.lambda_max - r.lambda_max) < 0.05 * std::abs(r.lambda_max));
    }
    SUBCASE("stable under doubling the series length") {
        const auto r2 = largest_lyapunov(attractor_series(5.4, 6000.0), 0.05, std::nullopt);
        CHECK(std::abs(r2.lambda_max - r.lambda_max) < 0.1 * std::abs(r.lambda_max));
    }
}

TEST_CASE("pure sine has a vanishing exponent") {
    const auto s = sampled_sine(1.0, 10000, 0.05);
    const auto r = largest_lyapunov(s, 0.05, std::nullopt);
    CHECK(std::abs(r.lambda_max) < 0.05);
}

TEST_CASE("manual embedding is honoured") {
    const auto s = attractor_series(5.4);
    const auto r = largest_lyapunov(s, 0.05, EmbeddingParams{4, 20, 80});
    CHECK(r.embedding.dim == 4);
    CHECK(r.embedding.lag == 20);
    CHECK(r.embedding.theiler == 80);
    CHECK(r.n_points == s.size() - 60);
}

TEST_CASE("short series are rejected") {
    CHECK_THROWS_AS(largest_lyapunov(sampled_sine(1.0, 4999, 0.05), 0.05, std::nullopt), AnalysisError);
    CHECK_THROWS_AS(largest_lyapunov(std::vector<double>(6000, 1.0), 0.05, std::nullopt), AnalysisError);
}

TEST_CASE("trajectory overload reads the post-transient part") {
    ModelParams p;
    p.tau2 = 5.4;
    const auto traj = integrate(p, HistorySpec::constant(0.01), SolverConfig{0.01, 6000.0, 3000.0, 5});
    const auto a = largest_lyapunov(traj, std::nullopt);
    const auto tail = traj.post_transient();
    const auto b = largest_lyapunov(tail, traj.h_record, std::nullopt);
    CHECK(a.lambda_max == b.lambda_max);

    Trajectory short_traj = traj;
    short_traj.transient_index = traj.xs.size() - 100;
    CHECK_THROWS_AS(largest_lyapunov(short_traj, std::nullopt), AnalysisError);
}

}
