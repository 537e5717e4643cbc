#pragma once

#include "reprec/scenario.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace reprec {

// Stream tags for per-trial seed derivation. The channel stream is shared by
// all algorithms in a trial; the init stream is identical across algorithms so
// variants can be compared on equal starting points.
inline constexpr std::uint64_t kChannelStreamTag = 0xC4A71;
inline constexpr std::uint64_t kInitStreamTag = 0x1717;

struct AlgorithmOutcome {
    Variant variant{};
    bool failed = false;
    std::string failure_reason;
    double final_sum_rate = 0.0;
    IterationTrace trace;
};

struct TrialResult {
    std::vector<AlgorithmOutcome> outcomes;  // one per requested algorithm, in order
};

/// Runs one Monte Carlo trial: draws a single channel set shared by every
/// requested algorithm and runs each of them. Deterministic in
/// (spec.seed, snr_index, trial_index) regardless of execution order.
inline TrialResult run_trial(const ScenarioSpec& spec, double snr_db, int snr_index,
                             int trial_index) {
    spec.validate();
    const NetworkConfig cfg = spec.network_config(snr_db);

    Rng channel_rng(derive_seed(spec.seed, static_cast<std::uint64_t>(snr_index),
                                static_cast<std::uint64_t>(trial_index), kChannelStreamTag));
    const ChannelSet channels =
        draw_channel_set(spec.n_r, spec.n_t, spec.channel_params(), channel_rng);
    const std::uint64_t init_seed =
        derive_seed(spec.seed, static_cast<std::uint64_t>(snr_index),
                    static_cast<std::uint64_t>(trial_index), kInitStreamTag);

    TrialResult result;
    result.outcomes.reserve(spec.algorithms.size());
    for (Variant v : spec.algorithms) {
        AlgorithmOutcome outcome;
        outcome.variant = v;
        AlgorithmSettings settings = spec.settings;
        settings.variant = v;
        Rng rng(init_seed);
        try {
            RunResult run = run_algorithm(channels, cfg, settings, rng);
            outcome.trace = std::move(run.trace);
            outcome.final_sum_rate =
                outcome.trace.records.empty() ? 0.0 : outcome.trace.records.back().sum_rate;
        } catch (const numerical_failure& e) {
            outcome.failed = true;
            outcome.failure_reason = e.what();
        }
        result.outcomes.push_back(std::move(outcome));
    }
    return result;
}

/// Aggregate of one (snr, algorithm) cell. `present` is false when every trial
/// failed numerically.
struct SweepCell {
    double snr_db = 0.0;
    Variant variant{};
    bool present = false;
    double mean_sum_rate = 0.0;
    double std_err = 0.0;
    double convergence_fraction = 0.0;  // converged trials / total trials
    double mean_iterations = 0.0;
    double mean_effective_streams = 0.0;
    int trials = 0;
    int failures = 0;
};

struct SweepResult {
    std::vector<double> snr_grid_db;
    std::vector<Variant> algorithms;
    std::vector<SweepCell> cells;  // snr-major, then algorithm order

    const SweepCell& cell(int snr_index, int algo_index) const {
        return cells[static_cast<std::size_t>(snr_index) * algorithms.size() +
                     static_cast<std::size_t>(algo_index)];
    }
};

namespace detail {

struct TrialSummary {
    bool failed = false;
    bool converged = false;
    double final_sum_rate = 0.0;
    int iterations_used = 0;
    double mean_effective_streams = 0.0;
};

inline TrialSummary summarize(const AlgorithmOutcome& o) {
    TrialSummary s;
    s.failed = o.failed;
    if (o.failed) return s;
    s.converged = o.trace.converged;
    s.final_sum_rate = o.final_sum_rate;
    s.iterations_used = o.trace.iterations_used;
    if (!o.trace.records.empty()) {
        const auto& eff = o.trace.records.back().effective_streams;
        double acc = 0.0;
        for (int e : eff) acc += e;
        s.mean_effective_streams = eff.empty() ? 0.0 : acc / static_cast<double>(eff.size());
    }
    return s;
}

/// Mean / standard-error aggregation over trial summaries (failures excluded
/// from the statistics, counted separately). With a single successful trial
/// the standard error is zero by convention.
inline SweepCell aggregate_cell(double snr_db, Variant variant,
                                const std::vector<TrialSummary>& summaries) {
    SweepCell cell;
    cell.snr_db = snr_db;
    cell.variant = variant;
    cell.trials = static_cast<int>(summaries.size());

    double sum = 0.0;
    int ok = 0, converged = 0;
    double iters = 0.0, streams = 0.0;
    for (const TrialSummary& s : summaries) {
        if (s.failed) {
            ++cell.failures;
            continue;
        }
        ++ok;
        sum += s.final_sum_rate;
        converged += s.converged ? 1 : 0;
        iters += s.iterations_used;
        streams += s.mean_effective_streams;
    }
    if (ok == 0) return cell;

    cell.present = true;
    cell.mean_sum_rate = sum / ok;
    if (ok > 1) {
        double ss = 0.0;
        for (const TrialSummary& s : summaries) {
            if (s.failed) continue;
            const double dev = s.final_sum_rate - cell.mean_sum_rate;
            ss += dev * dev;
        }
        const double sample_std = std::sqrt(ss / (ok - 1));
        cell.std_err = sample_std / std::sqrt(static_cast<double>(ok));
    }
    cell.convergence_fraction = static_cast<double>(converged) / cell.trials;
    cell.mean_iterations = iters / ok;
    cell.mean_effective_streams = streams / ok;
    return cell;
}

}  // namespace detail

/// Ergodic sum-rate sweep: for every grid SNR and every requested algorithm,
/// averages the final sum rate over `trials` independent channel realizations.
/// Trials run in parallel over `jobs` threads; results land in preallocated
/// slots indexed by (snr, trial), so the aggregate is independent of the
/// execution order and of `jobs`.
inline SweepResult ergodic_sweep(const ScenarioSpec& spec, int jobs = 1) {
    spec.validate();
    if (jobs < 1) jobs = 1;

    const int n_snr = static_cast<int>(spec.snr_grid_db.size());
    const int n_alg = static_cast<int>(spec.algorithms.size());
    const int n_work = n_snr * spec.trials;

    // summaries[(snr * trials + trial) * n_alg + algo]
    std::vector<detail::TrialSummary> summaries(
        static_cast<std::size_t>(n_work) * static_cast<std::size_t>(n_alg));

    std::atomic<int> next{0};
    const auto worker = [&]() {
        for (;;) {
            const int w = next.fetch_add(1);
            if (w >= n_work) return;
            const int snr_index = w / spec.trials;
            const int trial_index = w % spec.trials;
            const TrialResult tr =
                run_trial(spec, spec.snr_grid_db[static_cast<std::size_t>(snr_index)], snr_index,
                          trial_index);
            for (int a = 0; a < n_alg; ++a) {
                summaries[static_cast<std::size_t>(w) * static_cast<std::size_t>(n_alg) +
                          static_cast<std::size_t>(a)] =
                    detail::summarize(tr.outcomes[static_cast<std::size_t>(a)]);
            }
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    SweepResult result;
    result.snr_grid_db = spec.snr_grid_db;
    result.algorithms = spec.algorithms;
    result.cells.reserve(static_cast<std::size_t>(n_snr) * static_cast<std::size_t>(n_alg));
    for (int s = 0; s < n_snr; ++s) {
        for (int a = 0; a < n_alg; ++a) {
            std::vector<detail::TrialSummary> cell_summaries;
            cell_summaries.reserve(static_cast<std::size_t>(spec.trials));
            for (int t = 0; t < spec.trials; ++t) {
                const int w = s * spec.trials + t;
                cell_summaries.push_back(
                    summaries[static_cast<std::size_t>(w) * static_cast<std::size_t>(n_alg) +
                              static_cast<std::size_t>(a)]);
            }
            result.cells.push_back(detail::aggregate_cell(
                spec.snr_grid_db[static_cast<std::size_t>(s)], spec.algorithms[static_cast<std::size_t>(a)],
                cell_summaries));
        }
    }
    return result;
}

/// Least-squares slope of mean sum rate versus log2(linear SNR) over the grid
/// points inside [window_lo_db, window_hi_db]. The result is in bits/s/Hz per
/// doubling of SNR (the multiplexing-gain estimate).
inline double estimate_multiplexing_gain(const SweepResult& sweep, Variant algorithm,
                                         double window_lo_db, double window_hi_db) {
    int algo_index = -1;
    for (std::size_t a = 0; a < sweep.algorithms.size(); ++a)
        if (sweep.algorithms[a] == algorithm) algo_index = static_cast<int>(a);
    if (algo_index < 0)
        throw std::invalid_argument("estimate_multiplexing_gain: algorithm not in sweep");

    std::vector<double> x, y;
    for (std::size_t s = 0; s < sweep.snr_grid_db.size(); ++s) {
        const double snr = sweep.snr_grid_db[s];
        if (snr < window_lo_db - 1e-9 || snr > window_hi_db + 1e-9) continue;
        const SweepCell& cell = sweep.cell(static_cast<int>(s), algo_index);
        if (!cell.present) continue;
        x.push_back(std::log2(std::pow(10.0, snr / 10.0)));
        y.push_back(cell.mean_sum_rate);
    }
    if (x.size() < 2)
        throw std::invalid_argument(
            "estimate_multiplexing_gain: need at least 2 SNR points in the window");

    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace reprec
