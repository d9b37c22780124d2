#include "twodelay/sync.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "twodelay/errors.hpp"

namespace twodelay {

SyncRecord simulate_pair(const ModelParams& p, double delta, const HistorySpec& hist1,
                         const HistorySpec& hist2, const SolverConfig& cfg) {
    p.validate();
    cfg.validate();
    if (p.alpha != 1.0) throw ParameterError("synchronization runs are integer order (alpha = 1)");
    if (!std::isfinite(delta)) throw ParameterError("delta must be finite");
    hist1.validate(p.total_delay());
    hist2.validate(p.total_delay());

    const double g = p.gamma;
    const double k = p.k;
    const double kw = p.k * p.decay_weight();
    auto rhs = [g, k, kw, delta](const State<2>& x, const State<2>& xd1, const State<2>& xd12) {
        const double f1 = -g * x[0] + k * std::sin(xd1[0]) - kw * std::sin(xd12[0]);
        const double f2 = -g * x[1] + k * std::sin(xd1[1]) - kw * std::sin(xd12[1]);
        return State<2>{f1, f2 + delta * (x[0] - x[1])};
    };
    StepperOptions opt;
    opt.h = cfg.h;
    opt.steps = cfg.steps();
    auto sol = integrate_method_of_steps<2>(
        rhs, [hist1, hist2](double t) { return State<2>{hist1(t), hist2(t)}; }, p.tau1,
        p.total_delay(), opt);

    SyncRecord rec;
    rec.params = p;
    rec.params.delta = delta;
    rec.delta = delta;
    const auto& values = sol.values();
    const std::size_t n = (values.size() + cfg.record_stride - 1) / cfg.record_stride;
    rec.t.reserve(n);
    rec.x1.reserve(n);
    rec.x2.reserve(n);
    rec.e.reserve(n);
    for (std::size_t i = 0; i < values.size(); i += cfg.record_stride) {
        rec.t.push_back(static_cast<double>(i) * cfg.h);
        rec.x1.push_back(values[i][0]);
        rec.x2.push_back(values[i][1]);
        rec.e.push_back(values[i][0] - values[i][1]);
    }
    return rec;
}

std::vector<std::pair<double, double>> error_decay_table(const SyncRecord& rec,
                                                         const std::vector<double>& times) {
    if (rec.t.empty()) throw LookupError("empty synchronization record");
    const double t0 = rec.t.front();
    const double t1 = rec.t.back();
    const double dt = rec.t.size() > 1 ? rec.t[1] - rec.t[0] : 1.0;
    std::vector<std::pair<double, double>> out;
    out.reserve(times.size());
    for (double t : times) {
        if (!(t >= t0 - 0.5 * dt && t <= t1 + 0.5 * dt)) {
            throw LookupError("time " + std::to_string(t) + " outside the record span");
        }
        auto i = static_cast<std::size_t>(std::llround((t - t0) / dt));
        i = std::min(i, rec.t.size() - 1);
        out.emplace_back(t, std::abs(rec.e[i]));
    }
    return out;
}

void write_sync_csv(std::ostream& os, const SyncRecord& rec) {
    os << "t,x1,x2,e\n" << std::setprecision(17);
    for (std::size_t i = 0; i < rec.t.size(); ++i) {
        os << rec.t[i] << ',' << rec.x1[i] << ',' << rec.x2[i] << ',' << rec.e[i] << '\n';
    }
}

}  // namespace twodelay
