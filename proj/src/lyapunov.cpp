#include "twodelay/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "twodelay/errors.hpp"

namespace twodelay {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::size_t kFnnMaxQueries = 4000;

/// Points ordered by their first coordinate. Neighbour scans walk outward from the query's
/// rank and stop once the first-coordinate gap alone exceeds the search radius.
class SortedIndex {
public:
    explicit SortedIndex(const Embedding& emb) : emb_(emb), order_(emb.size()), rank_(emb.size()) {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        std::stable_sort(order_.begin(), order_.end(), [&emb](std::size_t a, std::size_t b) {
            return emb.point(a)[0] < emb.point(b)[0];
        });
        for (std::size_t r = 0; r < order_.size(); ++r) rank_[order_[r]] = r;
    }

    /// Nearest accepted point to q with positive distance; nullopt if none.
    template <class Accept>
    std::optional<std::pair<std::size_t, double>> nearest(std::size_t q, Accept accept) const {
        const double key = emb_.point(q)[0];
        double best2 = std::numeric_limits<double>::infinity();
        std::size_t best = q;
        auto visit = [&](std::size_t r) {
            const std::size_t j = order_[r];
            if (j == q || !accept(j)) return;
            const double d2 = dist2(q, j, best2);
            if (d2 > 0.0 && d2 < best2) {
                best2 = d2;
                best = j;
            }
        };
        const std::size_t r0 = rank_[q];
        for (std::size_t r = r0 + 1; r < order_.size(); ++r) {
            const double g = emb_.point(order_[r])[0] - key;
            if (g * g >= best2) break;
            visit(r);
        }
        for (std::size_t r = r0; r-- > 0;) {
            const double g = key - emb_.point(order_[r])[0];
            if (g * g >= best2) break;
            visit(r);
        }
        if (best == q) return std::nullopt;
        return std::make_pair(best, std::sqrt(best2));
    }

    /// Calls visit(j, distance) for every point within radius of q (excluding q).
    template <class Visit>
    void within(std::size_t q, double radius, Visit visit) const {
        const double key = emb_.point(q)[0];
        const std::size_t r0 = rank_[q];
        const double r2 = radius * radius;
        auto check = [&](std::size_t j) {
            const double d2 = dist2(q, j, r2);
            if (d2 <= r2) visit(j, std::sqrt(d2));
        };
        for (std::size_t r = r0 + 1; r < order_.size() && emb_.point(order_[r])[0] - key <= radius; ++r) {
            check(order_[r]);
        }
        for (std::size_t r = r0; r-- > 0 && key - emb_.point(order_[r])[0] <= radius;) check(order_[r]);
    }

private:
    double dist2(std::size_t a, std::size_t b, double cap) const noexcept {
        const auto pa = emb_.point(a);
        const auto pb = emb_.point(b);
        double s = 0.0;
        for (std::size_t c = 0; c < pa.size(); ++c) {
            const double d = pa[c] - pb[c];
            s += d * d;
            if (s > cap) return s;
        }
        return s;
    }

    const Embedding& emb_;
    std::vector<std::size_t> order_;
    std::vector<std::size_t> rank_;
};

std::size_t gap(std::size_t a, std::size_t b) noexcept { return a > b ? a - b : b - a; }

void require_nonconstant(std::span<const double> series) {
    const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
    if (series.empty() || !(*hi > *lo)) throw AnalysisError("series is constant");
}

double angle_between(std::span<const double> origin, std::span<const double> a,
                     std::span<const double> b) noexcept {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t c = 0; c < origin.size(); ++c) {
        const double u = a[c] - origin[c];
        const double v = b[c] - origin[c];
        dot += u * v;
        na += u * u;
        nb += v * v;
    }
    if (na == 0.0 || nb == 0.0) return kPi;
    return std::acos(std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0));
}

}  // namespace

void EmbeddingParams::validate() const {
    if (dim < 1) throw ParameterError("embedding dimension must be >= 1");
    if (lag < 1) throw ParameterError("embedding lag must be >= 1");
}

Embedding::Embedding(std::span<const double> series, std::size_t dim, std::size_t lag)
    : dim_(dim), count_(0) {
    if (dim < 1 || lag < 1) throw ParameterError("embedding needs dim >= 1 and lag >= 1");
    const std::size_t span = (dim - 1) * lag;
    if (series.size() <= span + 1) {
        throw AnalysisError("series of length " + std::to_string(series.size()) +
                            " too short for dim=" + std::to_string(dim) + ", lag=" + std::to_string(lag));
    }
    count_ = series.size() - span;
    coords_.resize(count_ * dim_);
    for (std::size_t i = 0; i < count_; ++i) {
        for (std::size_t c = 0; c < dim_; ++c) coords_[i * dim_ + c] = series[i + c * lag];
    }
}

double Embedding::distance(std::size_t a, std::size_t b) const noexcept {
    const auto pa = point(a);
    const auto pb = point(b);
    double s = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) s += (pa[c] - pb[c]) * (pa[c] - pb[c]);
    return std::sqrt(s);
}

std::vector<std::vector<double>> embed(std::span<const double> series, const EmbeddingParams& e) {
    e.validate();
    const Embedding emb(series, e.dim, e.lag);
    std::vector<std::vector<double>> out;
    out.reserve(emb.size());
    for (std::size_t i = 0; i < emb.size(); ++i) {
        const auto p = emb.point(i);
        out.emplace_back(p.begin(), p.end());
    }
    return out;
}

namespace {

std::vector<std::size_t> rank_bins(std::span<const double> series, std::size_t n_bins) {
    std::vector<std::size_t> order(series.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&series](std::size_t a, std::size_t b) { return series[a] < series[b]; });
    std::vector<std::size_t> bins(series.size());
    for (std::size_t r = 0; r < order.size(); ++r) bins[order[r]] = r * n_bins / order.size();
    return bins;
}

double mutual_information_binned(const std::vector<std::size_t>& bins, std::size_t lag,
                                 std::size_t n_bins) {
    const std::size_t n = bins.size() - lag;
    std::vector<double> joint(n_bins * n_bins, 0.0), pa(n_bins, 0.0), pb(n_bins, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = bins[i];
        const std::size_t b = bins[i + lag];
        joint[a * n_bins + b] += 1.0;
        pa[a] += 1.0;
        pb[b] += 1.0;
    }
    const double inv = 1.0 / static_cast<double>(n);
    double mi = 0.0;
    for (std::size_t a = 0; a < n_bins; ++a) {
        for (std::size_t b = 0; b < n_bins; ++b) {
            const double pj = joint[a * n_bins + b] * inv;
            if (pj > 0.0) mi += pj * std::log(pj / (pa[a] * inv * pb[b] * inv));
        }
    }
    return mi;
}

}  // namespace

double mutual_information(std::span<const double> series, std::size_t lag, std::size_t n_bins) {
    require_nonconstant(series);
    if (n_bins < 2) throw ParameterError("mutual information needs >= 2 bins");
    if (lag >= series.size()) throw AnalysisError("lag exceeds series length");
    return mutual_information_binned(rank_bins(series, n_bins), lag, n_bins);
}

std::size_t mutual_information_lag(std::span<const double> series, std::size_t max_lag,
                                   std::size_t n_bins) {
    if (max_lag < 1) throw ParameterError("max_lag must be >= 1");
    if (n_bins < 2) throw ParameterError("mutual information needs >= 2 bins");
    if (series.size() < 10 * max_lag) {
        throw AnalysisError("mutual information needs at least 10 * max_lag samples");
    }
    require_nonconstant(series);
    const auto bins = rank_bins(series, n_bins);
    std::vector<double> mi(max_lag + 2);
    for (std::size_t lag = 0; lag <= max_lag + 1 && lag < series.size(); ++lag) {
        mi[lag] = mutual_information_binned(bins, lag, n_bins);
    }
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        if (mi[lag] < mi[lag - 1] && mi[lag] <= mi[lag + 1]) return lag;
    }
    return max_lag;
}

FnnResult false_nearest_neighbors(std::span<const double> series, std::size_t lag, std::size_t m_max,
                                  double rtol, double atol) {
    if (lag < 1 || m_max < 1) throw ParameterError("FNN needs lag >= 1 and m_max >= 1");
    require_nonconstant(series);
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / series.size();
    double var = 0.0;
    for (double x : series) var += (x - mean) * (x - mean);
    const double attractor_size = std::sqrt(var / series.size());

    FnnResult out;
    for (std::size_t m = 1; m <= m_max; ++m) {
        // Points whose (m+1)-th coordinate x_{i + m lag} exists.
        if (series.size() <= m * lag + 2) break;
        const Embedding emb(series.first(series.size() - lag), m, lag);
        const SortedIndex index(emb);
        const std::size_t n = emb.size();
        const std::size_t stride = std::max<std::size_t>(1, n / kFnnMaxQueries);
        std::size_t tested = 0, false_count = 0;
        for (std::size_t i = 0; i < n; i += stride) {
            auto nn = index.nearest(i, [i, lag](std::size_t j) { return gap(i, j) > lag; });
            if (!nn) continue;
            const auto [j, r] = *nn;
            const double extra = std::abs(series[i + m * lag] - series[j + m * lag]);
            const double r_next = std::sqrt(r * r + extra * extra);
            ++tested;
            if (extra / r > rtol || r_next / attractor_size > atol) ++false_count;
        }
        const double fraction =
            tested == 0 ? 1.0 : static_cast<double>(false_count) / static_cast<double>(tested);
        out.fractions.push_back(fraction);
        if (fraction < 0.01) {
            out.dim = m;
            out.saturated = false;
            return out;
        }
    }
    out.dim = std::max<std::size_t>(1, out.fractions.size());
    out.saturated = true;
    return out;
}

EmbeddingParams auto_embedding(std::span<const double> series, const WolfOptions& opt,
                               bool* fnn_saturated) {
    const std::size_t max_lag = std::min(opt.max_lag, std::max<std::size_t>(1, series.size() / 10));
    EmbeddingParams e;
    e.lag = mutual_information_lag(series, max_lag, opt.mi_bins);
    const FnnResult fnn = false_nearest_neighbors(series, e.lag, opt.m_max);
    e.dim = fnn.dim;
    e.theiler = 4 * e.lag;
    if (fnn_saturated) *fnn_saturated = fnn.saturated;
    return e;
}

LyapunovReport largest_lyapunov(std::span<const double> series, double dt,
                                std::optional<EmbeddingParams> embedding, const WolfOptions& opt) {
    if (!(dt > 0.0)) throw ParameterError("sampling interval must be > 0");
    if (!(opt.evolve_time > 0.0)) throw ParameterError("evolve_time must be > 0");
    if (series.size() < opt.min_samples) {
        throw AnalysisError("Lyapunov estimation needs >= " + std::to_string(opt.min_samples) +
                            " samples, got " + std::to_string(series.size()));
    }
    require_nonconstant(series);

    LyapunovReport report;
    if (embedding) {
        embedding->validate();
        report.embedding = *embedding;
    } else {
        report.embedding = auto_embedding(series, opt, &report.fnn_saturated);
    }
    const EmbeddingParams& e = report.embedding;
    const Embedding emb(series, e.dim, e.lag);
    const SortedIndex index(emb);
    const std::size_t m = emb.size();
    report.n_points = m;

    const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
    const double eps = opt.scale_fraction * (*hi - *lo);
    const double outer = opt.annulus_factor * eps;
    const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opt.evolve_time / dt)));
    if (m <= steps + 1) throw AnalysisError("embedded series shorter than one evolution step");

    auto evolvable = [&](std::size_t i, std::size_t j) { return gap(i, j) > e.theiler && j + steps < m; };

    auto first = index.nearest(0, [&](std::size_t j) { return evolvable(0, j); });
    if (!first) throw AnalysisError("no admissible initial neighbour");
    std::size_t i = 0;
    std::size_t j = first->first;
    double d0 = first->second;

    double log_sum = 0.0;
    double elapsed = 0.0;
    std::vector<std::pair<double, double>> curve;
    while (i + steps < m && j + steps < m) {
        i += steps;
        j += steps;
        const double d1 = emb.distance(i, j);
        if (d0 > 0.0 && d1 > 0.0) log_sum += std::log(d1 / d0);
        elapsed += static_cast<double>(steps) * dt;
        ++report.renormalizations;
        curve.emplace_back(elapsed, log_sum);
        if (i + steps >= m) break;

        if (d1 > 0.0 && d1 <= outer && j + steps < m && gap(i, j) > e.theiler) {
            d0 = d1;
            continue;
        }

        // Replacement: the annulus candidate closest in orientation to the old separation.
        ++report.replacements;
        const auto origin = emb.point(i);
        const auto old_dir = emb.point(j);
        std::optional<std::pair<std::size_t, double>> chosen;
        std::optional<std::pair<std::size_t, double>> fallback;
        for (double radius = outer; !chosen && radius <= 64.0 * outer; radius *= 2.0) {
            const double inner = radius == outer ? eps : 0.0;
            double best_angle = std::numeric_limits<double>::infinity();
            std::size_t best_j = 0;
            double best_d = 0.0;
            index.within(i, radius, [&](std::size_t c, double d) {
                if (d < inner || d <= 0.0 || !evolvable(i, c)) return;
                const double a = angle_between(origin, emb.point(c), old_dir);
                if (a < best_angle || (a == best_angle && d < best_d)) {
                    best_angle = a;
                    best_j = c;
                    best_d = d;
                }
            });
            if (best_angle <= opt.max_angle) {
                chosen = std::make_pair(best_j, best_d);
            } else if (!fallback && std::isfinite(best_angle)) {
                fallback = std::make_pair(best_j, best_d);
            }
        }
        if (!chosen) chosen = fallback;
        if (!chosen) chosen = index.nearest(i, [&](std::size_t c) { return evolvable(i, c); });
        if (!chosen) break;
        j = chosen->first;
        d0 = chosen->second;
    }
    if (elapsed <= 0.0) throw AnalysisError("no divergence steps could be evolved");

    report.lambda_max = log_sum / elapsed;
    double ss = 0.0;
    for (const auto& [t, s] : curve) ss += (s - report.lambda_max * t) * (s - report.lambda_max * t);
    report.fit_diagnostic = std::sqrt(ss / static_cast<double>(curve.size()));
    return report;
}

LyapunovReport largest_lyapunov(const Trajectory& traj, std::optional<EmbeddingParams> embedding,
                                const WolfOptions& opt) {
    return largest_lyapunov(traj.post_transient(), traj.h_record, embedding, opt);
}

}  // namespace twodelay
