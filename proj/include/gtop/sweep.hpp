#pragma once

// Parameter sweeps: the Cartesian grid of the configured axes, one
// simulation per point, executed by a small worker pool. Rows are appended
// to the summary stream as soon as they are ready, in grid order regardless
// of parallelism (a reorder buffer holds finished rows until their turn), so
// the summary is crash-safe and byte-identical for any worker count.

#include <atomic>
#include <condition_variable>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <gtop/config.hpp>
#include <gtop/convergence.hpp>
#include <gtop/integrate.hpp>
#include <gtop/output.hpp>
#include <gtop/stability.hpp>

namespace gtop {

struct SweepRow {
    long index = 0;
    std::vector<double> values; ///< one per axis, same order as the config
    bool predicted_upright = false;
    Limit observed = Limit::Undetermined;
    double t_converged = 0.0;
    std::string termination;
    std::string error; ///< non-empty when this point failed
};

inline std::string sweep_csv_header(const SweepConfig& cfg) {
    std::string h = "index";
    for (const auto& axis : cfg.axes) h += "," + axis.path;
    h += ",predicted_upright,observed,t_converged,termination,error";
    return h;
}

inline std::string sweep_csv_row(const SweepRow& row) {
    std::string out = std::to_string(row.index);
    for (double v : row.values) out += "," + format_g17(v);
    out += row.predicted_upright ? ",1" : ",0";
    out += std::string(",") + to_string(row.observed);
    out += "," + (row.observed == Limit::Undetermined ? std::string() : format_g17(row.t_converged));
    out += "," + row.termination;
    out += "," + row.error;
    return out;
}

/// Runs one grid point: apply overrides, integrate, classify, detect.
inline SweepRow run_sweep_point(const SweepConfig& cfg, long index) {
    SweepRow row;
    row.index = index;

    long rem = index;
    row.values.resize(cfg.axes.size());
    for (long a = static_cast<long>(cfg.axes.size()) - 1; a >= 0; --a) {
        const auto& axis = cfg.axes[a];
        row.values[a] = axis.values[rem % axis.values.size()];
        rem /= static_cast<long>(axis.values.size());
    }

    try {
        RunConfig point = cfg.base;
        for (std::size_t a = 0; a < cfg.axes.size(); ++a)
            apply_override(point, cfg.axes[a].path, row.values[a]);

        const PhysicalParams params = point.make_params();
        const FrictionModel friction = point.make_friction();
        const VectorState initial = point.make_initial(params);

        const double LA3 = dot(initial.L, initial.axis);
        row.predicted_upright = classify_stability(LA3, params).upright_stable;

        const Trajectory traj =
            integrate(initial, params, friction, point.integrator, point.convergence);
        const ConvergenceResult conv = detect_convergence(traj, params, point.convergence);
        row.observed = conv.limit;
        row.t_converged = conv.t_converged;
        row.termination = to_string(traj.termination.kind);
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

/// Executes the whole grid with up to cfg.parallelism workers. Returns the
/// rows in grid order; `summary` (optional) receives the header plus one row
/// per point, written incrementally in grid order.
inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg, std::ostream* summary) {
    long total = 1;
    for (const auto& axis : cfg.axes) total *= static_cast<long>(axis.values.size());

    if (summary) *summary << sweep_csv_header(cfg) << '\n' << std::flush;

    std::vector<SweepRow> rows(static_cast<std::size_t>(total));
    std::atomic<long> next{0};
    std::mutex mu;
    std::map<long, const SweepRow*> pending;
    long write_cursor = 0;

    const auto drain = [&]() { // caller holds mu
        while (true) {
            auto it = pending.find(write_cursor);
            if (it == pending.end()) break;
            if (summary) *summary << sweep_csv_row(*it->second) << '\n' << std::flush;
            pending.erase(it);
            ++write_cursor;
        }
    };

    const auto worker = [&]() {
        while (true) {
            const long i = next.fetch_add(1);
            if (i >= total) return;
            rows[static_cast<std::size_t>(i)] = run_sweep_point(cfg, i);
            std::lock_guard<std::mutex> lock(mu);
            pending.emplace(i, &rows[static_cast<std::size_t>(i)]);
            drain();
        }
    };

    const int n_workers = std::max(1, std::min<int>(cfg.parallelism, static_cast<int>(total)));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return rows;
}

} // namespace gtop
