// Batch command-line front end: simulate, bifurcate, lyapunov, control-gain, sync.
// Exit codes: 0 ok, 1 usage or invalid input, 2 divergence, 3 no control threshold.

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "twodelay/bifurcation.hpp"
#include "twodelay/dde_integrator.hpp"
#include "twodelay/errors.hpp"
#include "twodelay/fractional.hpp"
#include "twodelay/lyapunov.hpp"
#include "twodelay/model.hpp"
#include "twodelay/stability.hpp"
#include "twodelay/svg.hpp"
#include "twodelay/sync.hpp"

namespace fs = std::filesystem;
using namespace twodelay;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitNoThreshold = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shortest text that reads back to the same double.
std::string format_value(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}
std::string format_value(const std::string& v) { return v; }
std::string format_value(bool v) { return v ? "true" : "false"; }
template <class T>
    requires std::is_integral_v<T>
std::string format_value(T v) {
    return std::to_string(v);
}
std::string format_value(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_value(v[i]);
    return out;
}

/// One subcommand plus the bookkeeping the config file and the sidecar need.
class Command {
public:
    Command(CLI::App& root, const std::string& name, const std::string& description)
        : app_(root.add_subcommand(name, description)), name_(name) {
        // --h is the step size, so help is --help only.
        app_->set_help_flag("--help", "print this help and exit");
        app_->add_option("--config", config_path_, "flat `key = value` file; flags given here win [path]");
        add("out", out_dir_, "output directory, created if missing [path]");
        add_flag("plot", plot_, "also write SVG plots [flag]");
    }

    template <class T>
    CLI::Option* add(const std::string& key, T& var, const std::string& help) {
        auto* opt = app_->add_option("--" + key, var, help)->capture_default_str();
        if constexpr (std::is_same_v<T, std::vector<double>>) opt->delimiter(',');
        options_[key] = opt;
        echo_.emplace_back(key, [&var] { return format_value(var); });
        return opt;
    }

    void add_flag(const std::string& key, bool& var, const std::string& help) {
        options_[key] = app_->add_flag("--" + key, var, help);
        echo_.emplace_back(key, [&var] { return format_value(var); });
    }

    void add_model(ModelParams& p, bool tau2 = true, bool alpha = true, bool mu = true) {
        add("gamma", p.gamma, "decay rate gamma [1/time]");
        add("k", p.k, "feedback amplitude k [1/time]");
        add("tau1", p.tau1, "first delay tau1 >= 0 [time]");
        if (tau2) add("tau2", p.tau2, "second delay tau2 >= 0 [time]");
        if (alpha) add("alpha", p.alpha, "Caputo order, 0 < alpha <= 1; below 1 uses the fractional solver [dimensionless]");
        if (mu) add("mu", p.mu, "control gain mu >= 0 [1/time]");
    }

    bool parsed() const { return app_->parsed(); }
    const std::string& name() const { return name_; }
    bool plot() const { return plot_; }
    bool given(const std::string& key) const { return options_.at(key)->count() > 0; }

    /// Fills options absent from the command line with values from --config.
    void merge_config() {
        if (config_path_.empty()) return;
        std::ifstream in(config_path_);
        if (!in) throw UsageError("cannot read config file " + config_path_);
        std::map<std::string, int> seen;
        std::string line;
        for (int lineno = 1; std::getline(in, line); ++lineno) {
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            const auto where = config_path_ + ":" + std::to_string(lineno);
            if (trim(line).empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw UsageError(where + ": expected `key = value`");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            const auto it = options_.find(key);
            if (it == options_.end()) {
                throw UsageError(where + ": unknown key '" + key + "' for " + name_);
            }
            if (!seen.emplace(key, lineno).second) throw UsageError(where + ": duplicate key '" + key + "'");
            CLI::Option* opt = it->second;
            if (opt->count() > 0) continue;
            try {
                opt->add_result(value);
                opt->run_callback();
            } catch (const CLI::Error& e) {
                throw UsageError(where + ": bad value for '" + key + "': " + e.what());
            }
        }
    }

    /// Creates the output directory and opens every output for writing before any compute.
    std::ofstream open_output(const std::string& file) {
        std::error_code ec;
        fs::create_directories(out_dir_, ec);
        const fs::path path = fs::path(out_dir_) / file;
        std::ofstream os(path, std::ios::trunc);
        if (!os) throw UsageError("cannot write " + path.string());
        written_.push_back(path.string());
        return os;
    }

    /// Effective configuration as a reusable config file next to the outputs.
    void write_sidecar() {
        auto os = open_output(name_ + ".cfg");
        os << "# effective configuration of `twodelay " << name_ << "`\n";
        for (const auto& [key, value] : echo_) os << key << " = " << value() << '\n';
        if (!os) throw UsageError("failed writing the config sidecar");
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    }

    CLI::App* app_;
    std::string name_;
    std::string config_path_;
    std::string out_dir_ = ".";
    bool plot_ = false;
    std::map<std::string, CLI::Option*> options_;
    std::vector<std::pair<std::string, std::function<std::string()>>> echo_;
    std::vector<std::string> written_;
};

void warn_step(const ModelParams& p, double h) {
    if (auto w = step_guard_warning(p, h)) std::cerr << "warning: " << *w << '\n';
}

/// x(t) from the recorded grid, linear between samples, history before t0.
double sample_at(const Trajectory& traj, const HistorySpec& hist, double t) {
    if (t < traj.t0) return hist(t - traj.t0);
    const double s = (t - traj.t0) / traj.h_record;
    const auto i = static_cast<std::size_t>(std::floor(s));
    if (i + 1 >= traj.xs.size()) return traj.xs.back();
    const double w = s - static_cast<double>(i);
    return traj.xs[i] + w * (traj.xs[i + 1] - traj.xs[i]);
}

void ensure_written(std::ofstream& os, const std::string& what) {
    os.flush();
    if (!os) throw UsageError("failed writing " + what);
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    ModelParams p;
    double h = 0.01;
    double t_end = 1000.0;
    double transient = 0.0;
    std::size_t stride = 1;
    double history = 0.01;
    std::size_t memory_window = 0;
};

void add_simulate(Command& c, SimulateArgs& a) {
    c.add_model(a.p);
    c.add("h", a.h, "step size [time]");
    c.add("t-end", a.t_end, "final time [time]");
    c.add("transient", a.transient, "leading span excluded from the phase portrait [time]");
    c.add("stride", a.stride, "keep every n-th step in the CSV [steps]");
    c.add("history", a.history, "constant initial history x(t), t <= 0 [state]");
    c.add("memory-window", a.memory_window, "fractional memory length, 0 keeps full memory [steps]");
}

int run_simulate(Command& c, const SimulateArgs& a) {
    a.p.validate();
    const HistorySpec hist = HistorySpec::constant(a.history);
    auto csv = c.open_output("trajectory.csv");
    std::optional<std::ofstream> svg;
    if (c.plot()) svg = c.open_output("phase.svg");
    c.write_sidecar();
    warn_step(a.p, a.h);

    Trajectory traj;
    if (a.p.alpha < 1.0) {
        FracSolverConfig cfg;
        cfg.h = a.h;
        cfg.t_end = a.t_end;
        cfg.transient = a.transient;
        cfg.record_stride = a.stride;
        if (a.memory_window > 0) cfg.memory_window = a.memory_window;
        std::cerr << "fractional solver, alpha = " << a.p.alpha << '\n';
        traj = integrate_frac(a.p, hist, cfg);
    } else {
        SolverConfig cfg{a.h, a.t_end, a.transient, a.stride};
        traj = integrate(a.p, hist, cfg);
    }
    write_trajectory_csv(csv, traj);
    ensure_written(csv, "trajectory.csv");

    if (svg) {
        std::vector<double> xs, ys;
        for (std::size_t i = traj.transient_index; i < traj.xs.size(); ++i) {
            xs.push_back(traj.xs[i]);
            ys.push_back(sample_at(traj, hist, traj.time(i) - a.p.tau1));
        }
        write_svg_plot(*svg, xs, ys,
                       {"phase portrait, tau2 = " + format_value(a.p.tau2), "x(t)", "x(t - tau1)", true});
        ensure_written(*svg, "phase.svg");
    }
    return kExitOk;
}

// --------------------------------------------------------------- bifurcate

struct BifurcateArgs {
    ModelParams p;
    double tau2_min = 0.0;
    double tau2_max = 7.0;
    std::size_t points = 600;
    std::vector<double> tau2_list;
    SolverConfig cfg = default_sweep_config();
    bool lyapunov = false;
    std::size_t jobs = 1;
};

void add_bifurcate(Command& c, BifurcateArgs& a) {
    c.add_model(a.p, false, false);
    c.add("tau2-min", a.tau2_min, "grid start, excluded [time]");
    c.add("tau2-max", a.tau2_max, "grid end, included [time]");
    c.add("points", a.points, "number of evenly spaced tau2 values [count]");
    c.add("tau2-list", a.tau2_list, "explicit ascending tau2 values, comma separated; overrides the grid [time]");
    c.add("h", a.cfg.h, "step size [time]");
    c.add("t-end", a.cfg.t_end, "final time per row [time]");
    c.add("transient", a.cfg.transient, "discarded leading span per row [time]");
    c.add("stride", a.cfg.record_stride, "record every n-th step [steps]");
    c.add_flag("lyapunov", a.lyapunov, "attach the largest Lyapunov exponent to oscillating rows [flag]");
    c.add("jobs", a.jobs, "worker threads for rows [count]");
}

int run_bifurcate(Command& c, const BifurcateArgs& a) {
    std::vector<double> grid = a.tau2_list;
    if (grid.empty()) {
        if (a.points == 0) throw ParameterError("points must be >= 1");
        if (!(a.tau2_max > a.tau2_min)) throw ParameterError("tau2-max must exceed tau2-min");
        for (std::size_t i = 0; i < a.points; ++i) {
            grid.push_back(a.tau2_min + (a.tau2_max - a.tau2_min) * static_cast<double>(i + 1) /
                                            static_cast<double>(a.points));
        }
    }
    auto diagram = c.open_output("bifurcation.csv");
    auto regimes = c.open_output("regimes.csv");
    std::optional<std::ofstream> svg;
    if (c.plot()) svg = c.open_output("bifurcation.svg");
    c.write_sidecar();
    warn_step(ModelParams{a.p.gamma, a.p.k, a.p.tau1, grid.front()}, a.cfg.h);

    SweepOptions opt;
    opt.lyapunov = a.lyapunov;
    opt.jobs = a.jobs;
    const auto rows = sweep_tau2(a.p, grid, a.cfg, opt);
    write_bifurcation_csv(diagram, rows);
    write_regime_csv(regimes, rows);
    ensure_written(diagram, "bifurcation.csv");
    ensure_written(regimes, "regimes.csv");

    std::size_t counts[4] = {};
    for (const auto& r : rows) ++counts[static_cast<int>(r.regime.kind)];
    std::cout << rows.size() << " rows: " << counts[0] << " equilibrium, " << counts[1] << " periodic, "
              << counts[2] << " chaotic, " << counts[3] << " unbounded\n";

    if (svg) {
        std::vector<double> xs, ys;
        for (const auto& r : rows) {
            for (double s : r.samples) {
                xs.push_back(r.tau2);
                ys.push_back(s);
            }
        }
        write_svg_plot(*svg, xs, ys, {"bifurcation diagram", "tau2", "local extrema of x", false});
        ensure_written(*svg, "bifurcation.svg");
    }
    return kExitOk;
}

// ---------------------------------------------------------------- lyapunov

struct LyapunovArgs {
    ModelParams p;
    double h = 0.01;
    double transient = 3000.0;
    double window = 3000.0;
    double dt = 0.05;
    double history = 0.01;
    std::string input;
    std::size_t m = 0;
    std::size_t lag = 0;
    long theiler = -1;
    WolfOptions wolf;
};

void add_lyapunov(Command& c, LyapunovArgs& a) {
    c.add_model(a.p);
    c.add("h", a.h, "integration step [time]");
    c.add("transient", a.transient, "discarded leading span [time]");
    c.add("window", a.window, "analysed span after the transient [time]");
    c.add("dt", a.dt, "sampling interval of the analysed series [time]");
    c.add("history", a.history, "constant initial history [state]");
    c.add("input", a.input, "analyse this `t,x` CSV instead of simulating [path]");
    c.add("m", a.m, "embedding dimension, 0 chooses automatically [count]");
    c.add("lag", a.lag, "embedding lag, 0 chooses automatically [samples]");
    c.add("theiler", a.theiler, "neighbour exclusion window, -1 uses four lags [samples]");
    c.add("evolve-time", a.wolf.evolve_time, "evolution time between renormalizations [time]");
    c.add("max-angle", a.wolf.max_angle, "largest orientation change of a replacement neighbour [rad]");
    c.add("min-samples", a.wolf.min_samples, "shortest accepted series [samples]");
}

/// x column of a `t,x` CSV and its sampling interval.
std::pair<std::vector<double>, double> read_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    std::string line;
    std::getline(in, line);
    std::vector<double> ts, xs;
    for (int lineno = 2; std::getline(in, line); ++lineno) {
        if (line.empty()) continue;
        std::istringstream row(line);
        double t = 0.0, x = 0.0;
        char comma = 0;
        if (!(row >> t >> comma >> x) || comma != ',') {
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected `t,x`");
        }
        ts.push_back(t);
        xs.push_back(x);
    }
    if (ts.size() < 2) throw AnalysisError(path + " holds fewer than 2 samples");
    return {xs, (ts.back() - ts.front()) / static_cast<double>(ts.size() - 1)};
}

int run_lyapunov(Command& c, const LyapunovArgs& a) {
    a.p.validate();
    if ((a.m == 0) != (a.lag == 0)) throw UsageError("--m and --lag must be given together");
    if (!(a.dt > 0.0) || !(a.h > 0.0)) throw ParameterError("dt and h must be > 0");
    auto csv = c.open_output("lyapunov.csv");
    c.write_sidecar();

    std::vector<double> series;
    double dt = a.dt;
    if (!a.input.empty()) {
        std::tie(series, dt) = read_series(a.input);
    } else {
        warn_step(a.p, a.h);
        const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(a.dt / a.h)));
        dt = a.h * static_cast<double>(stride);
        Trajectory traj;
        const HistorySpec hist = HistorySpec::constant(a.history);
        if (a.p.alpha < 1.0) {
            FracSolverConfig cfg;
            cfg.h = a.h;
            cfg.t_end = a.transient + a.window;
            cfg.transient = a.transient;
            cfg.record_stride = stride;
            traj = integrate_frac(a.p, hist, cfg);
        } else {
            traj = integrate(a.p, hist, SolverConfig{a.h, a.transient + a.window, a.transient, stride});
        }
        const auto tail = traj.post_transient();
        series.assign(tail.begin(), tail.end());
    }

    std::optional<EmbeddingParams> manual;
    if (a.m > 0) {
        EmbeddingParams e;
        e.dim = a.m;
        e.lag = a.lag;
        e.theiler = a.theiler < 0 ? 4 * a.lag : static_cast<std::size_t>(a.theiler);
        manual = e;
    }
    const LyapunovReport r = largest_lyapunov(series, dt, manual, a.wolf);
    if (!manual) {
        std::cerr << "auto embedding: m = " << r.embedding.dim << ", lag = " << r.embedding.lag
                  << ", theiler = " << r.embedding.theiler << (r.fnn_saturated ? " (FNN saturated)" : "")
                  << '\n';
    }
    csv << "tau2,lambda_max,m,lag,n_points\n"
        << std::setprecision(17) << a.p.tau2 << ',' << r.lambda_max << ',' << r.embedding.dim << ','
        << r.embedding.lag << ',' << r.n_points << '\n';
    ensure_written(csv, "lyapunov.csv");
    std::cout << "lambda_max = " << std::setprecision(6) << r.lambda_max << " (fit rms " << r.fit_diagnostic
              << ", " << r.renormalizations << " renormalizations)\n";
    return kExitOk;
}

// ------------------------------------------------------------ control-gain

struct GainArgs {
    ModelParams p;
    double omega_max = 10.0;
};

void add_gain(Command& c, GainArgs& a) {
    c.add_model(a.p, true, false, false);
    c.add("omega-max", a.omega_max, "upper end of the crossing-frequency scan [rad/time]");
}

int run_gain(Command& c, const GainArgs& a) {
    a.p.validate();
    auto csv = c.open_output("gain.csv");
    c.write_sidecar();
    csv << "mu_star,omega_star,residual\n";
    const auto g = find_critical_gain(a.p, a.omega_max);
    if (!g) {
        ensure_written(csv, "gain.csv");
        std::cerr << "no threshold: no positive control gain places a root on the imaginary axis\n";
        return kExitNoThreshold;
    }
    std::ostringstream row;
    row << std::setprecision(17) << g->mu_star << ',' << g->omega_star << ',' << g->residual;
    csv << row.str() << '\n';
    ensure_written(csv, "gain.csv");
    std::cout << "mu_star,omega_star,residual\n" << row.str() << '\n';
    return kExitOk;
}

// -------------------------------------------------------------------- sync

struct SyncArgs {
    ModelParams p;
    double delta = 2.8;
    double x1_history = 0.01;
    double x2_history = -3.99;
    SolverConfig cfg{0.01, 200.0, 0.0, 1};
    std::vector<double> times{0.0, 5.0, 20.0, 100.0};
};

void add_sync(Command& c, SyncArgs& a) {
    c.add_model(a.p, true, false, false);
    c.add("delta", a.delta, "coupling gain of the slave, 0 runs uncoupled [1/time]");
    c.add("x1-history", a.x1_history, "constant master history [state]");
    c.add("x2-history", a.x2_history, "constant slave history [state]");
    c.add("h", a.cfg.h, "step size [time]");
    c.add("t-end", a.cfg.t_end, "final time [time]");
    c.add("stride", a.cfg.record_stride, "record every n-th step [steps]");
    c.add("times", a.times, "times of the error decay table, comma separated [time]");
}

int run_sync(Command& c, const SyncArgs& a) {
    a.p.validate();
    for (double t : a.times) {
        if (t < 0.0 || t > a.cfg.t_end) {
            throw UsageError("--times value " + format_value(t) + " lies outside [0, t-end]");
        }
    }
    auto csv = c.open_output("sync.csv");
    auto decay = c.open_output("decay.csv");
    std::optional<std::ofstream> svg;
    if (c.plot()) svg = c.open_output("sync.svg");
    c.write_sidecar();
    warn_step(a.p, a.cfg.h);

    const std::string mode = a.delta == 0.0 ? "uncontrolled" : "controlled";
    std::cout << mode << " run, delta = " << a.delta << "; gamma + delta > 2|k| is "
              << (check_sync_condition(a.p, a.delta) ? "satisfied" : "not satisfied") << '\n';

    const SyncRecord rec = simulate_pair(a.p, a.delta, HistorySpec::constant(a.x1_history),
                                         HistorySpec::constant(a.x2_history), a.cfg);
    write_sync_csv(csv, rec);
    ensure_written(csv, "sync.csv");

    const auto table = error_decay_table(rec, a.times);
    decay << "t,abs_e\n" << std::setprecision(17);
    std::cout << "t,abs_e\n" << std::setprecision(6);
    for (const auto& [t, e] : table) {
        decay << t << ',' << e << '\n';
        std::cout << t << ',' << e << '\n';
    }
    ensure_written(decay, "decay.csv");

    if (svg) {
        write_svg_plot(*svg, rec.t, rec.e, {"synchronization error (" + mode + ")", "t", "e(t)", true});
        ensure_written(*svg, "sync.svg");
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-delay sinusoidal feedback model: simulation, regime sweeps, Lyapunov exponents, "
                 "control thresholds and synchronization. Every command writes CSV into --out."};
    app.require_subcommand(1);

    SimulateArgs sim;
    BifurcateArgs bif;
    LyapunovArgs lyap;
    GainArgs gain;
    SyncArgs sync;
    Command c_sim(app, "simulate", "integrate one trajectory (alpha < 1 uses the fractional solver)");
    Command c_bif(app, "bifurcate", "sweep tau2, classify regimes, write the bifurcation diagram");
    Command c_lyap(app, "lyapunov", "largest Lyapunov exponent of a simulated or supplied series");
    Command c_gain(app, "control-gain", "critical control gain mu* of the linearized model");
    Command c_sync(app, "sync", "master/slave synchronization run and error decay table");
    add_simulate(c_sim, sim);
    add_bifurcate(c_bif, bif);
    add_lyapunov(c_lyap, lyap);
    add_gain(c_gain, gain);
    add_sync(c_sync, sync);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (c_sim.parsed()) {
            c_sim.merge_config();
            return run_simulate(c_sim, sim);
        }
        if (c_bif.parsed()) {
            c_bif.merge_config();
            return run_bifurcate(c_bif, bif);
        }
        if (c_lyap.parsed()) {
            c_lyap.merge_config();
            return run_lyapunov(c_lyap, lyap);
        }
        if (c_gain.parsed()) {
            c_gain.merge_config();
            return run_gain(c_gain, gain);
        }
        c_sync.merge_config();
        return run_sync(c_sync, sync);
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return kExitUsage;
    } catch (const AnalysisError& e) {
        std::cerr << "analysis failed: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}
