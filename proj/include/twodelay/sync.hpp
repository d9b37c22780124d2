#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "twodelay/dde_integrator.hpp"
#include "twodelay/model.hpp"

namespace twodelay {

/// Master/slave run. e[i] == x1[i] - x2[i] exactly.
struct SyncRecord {
    std::vector<double> t;
    std::vector<double> x1;
    std::vector<double> x2;
    std::vector<double> e;
    ModelParams params;
    double delta = 0.0;
};

/// Co-integrates master x1 and slave x2 = model + delta (x1 - x2) as one 2-dim delay system.
/// DivergenceError::component() tags the failing system (0 master, 1 slave).
SyncRecord simulate_pair(const ModelParams& p, double delta, const HistorySpec& hist1,
                         const HistorySpec& hist2, const SolverConfig& cfg);

/// |e(t)| at each requested time, read from the nearest recorded node.
std::vector<std::pair<double, double>> error_decay_table(const SyncRecord& rec,
                                                         const std::vector<double>& times);

/// `t,x1,x2,e` CSV with 17 significant digits.
void write_sync_csv(std::ostream& os, const SyncRecord& rec);

}  // namespace twodelay
