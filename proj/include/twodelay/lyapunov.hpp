#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "twodelay/dde_integrator.hpp"

namespace twodelay {

struct EmbeddingParams {
    std::size_t dim = 3;
    std::size_t lag = 1;
    /// Temporal exclusion window for neighbour searches, in samples.
    std::size_t theiler = 0;

    void validate() const;
};

/// Row-major delay vectors: point i is (x_i, x_{i+lag}, ..., x_{i+(dim-1)lag}).
class Embedding {
public:
    Embedding(std::span<const double> series, std::size_t dim, std::size_t lag);

    std::size_t size() const noexcept { return count_; }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const double> point(std::size_t i) const noexcept {
        return std::span<const double>(coords_).subspan(i * dim_, dim_);
    }
    double distance(std::size_t a, std::size_t b) const noexcept;

private:
    std::size_t dim_;
    std::size_t count_;
    std::vector<double> coords_;
};

/// Delay vectors as explicit points.
std::vector<std::vector<double>> embed(std::span<const double> series, const EmbeddingParams& e);

/// Lag of the first local minimum of histogram mutual information I(lag), lag in [1, max_lag],
/// using n_bins equiprobable (rank) bins. Returns max_lag when I has no interior minimum.
std::size_t mutual_information_lag(std::span<const double> series, std::size_t max_lag,
                                   std::size_t n_bins = 16);

/// Mutual information I(lag) in nats over equiprobable bins.
double mutual_information(std::span<const double> series, std::size_t lag, std::size_t n_bins);

struct FnnResult {
    std::size_t dim = 1;
    /// True when no trial dimension reached the 1% threshold and dim == m_max.
    bool saturated = false;
    /// False-neighbour fraction per trial dimension 1..m_max.
    std::vector<double> fractions;
};

/// Kennel-style false nearest neighbours; atol is in units of the series standard deviation.
FnnResult false_nearest_neighbors(std::span<const double> series, std::size_t lag, std::size_t m_max,
                                  double rtol = 15.0, double atol = 2.0);

struct WolfOptions {
    /// Time each neighbour pair evolves between renormalizations.
    double evolve_time = 1.0;
    /// Largest accepted orientation change for a replacement neighbour (radians).
    double max_angle = 0.3;
    /// epsilon as a fraction of the series extent (max - min).
    double scale_fraction = 0.01;
    /// Upper edge of the replacement annulus in units of epsilon.
    double annulus_factor = 5.0;
    /// Minimum samples required after the transient.
    std::size_t min_samples = 5000;
    /// Auto-embedding search limits.
    std::size_t max_lag = 200;
    std::size_t mi_bins = 16;
    std::size_t m_max = 10;
};

struct LyapunovReport {
    double lambda_max = 0.0;
    EmbeddingParams embedding;
    std::size_t n_points = 0;
    /// RMS deviation (log units) of the cumulative log-divergence curve from lambda_max * t.
    double fit_diagnostic = 0.0;
    std::size_t renormalizations = 0;
    std::size_t replacements = 0;
    /// Set when the auto-embedding FNN search never dropped below 1%.
    bool fnn_saturated = false;
};

/// Embedding chosen by mutual information (lag) then false nearest neighbours (dimension).
/// The Theiler window is set to four lags, about one characteristic period.
EmbeddingParams auto_embedding(std::span<const double> series, const WolfOptions& opt,
                               bool* fnn_saturated = nullptr);

/// Wolf fixed-evolution-time estimate of the largest exponent of a uniformly sampled series.
LyapunovReport largest_lyapunov(std::span<const double> series, double dt,
                                std::optional<EmbeddingParams> embedding, const WolfOptions& opt = {});

/// Same, on the post-transient part of a trajectory.
LyapunovReport largest_lyapunov(const Trajectory& traj, std::optional<EmbeddingParams> embedding,
                                const WolfOptions& opt = {});

}  // namespace twodelay
