#pragma once

#include "reprec/sweep.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace reprec {

namespace detail {

/// Shortest-round-trip decimal formatting with "." separator, locale-free.
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary: LF terminators everywhere
    if (!out) throw std::runtime_error("emit_results: cannot write " + path.string());
    return out;
}

}  // namespace detail

/// Sweep CSV, one row per (snr, algorithm) cell in grid order. Cells where all
/// trials failed keep their row with empty statistics fields.
inline void write_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path) {
    std::ofstream out = detail::open_out(path);
    out << "snr_db,algorithm,mean_sum_rate_bps_hz,std_err,convergence_fraction,"
           "mean_iterations,mean_effective_streams,trials,failures\n";
    for (std::size_t s = 0; s < sweep.snr_grid_db.size(); ++s) {
        for (std::size_t a = 0; a < sweep.algorithms.size(); ++a) {
            const SweepCell& c = sweep.cell(static_cast<int>(s), static_cast<int>(a));
            out << detail::fmt_double(c.snr_db) << ',' << variant_name(c.variant) << ',';
            if (c.present) {
                out << detail::fmt_double(c.mean_sum_rate) << ',' << detail::fmt_double(c.std_err)
                    << ',' << detail::fmt_double(c.convergence_fraction) << ','
                    << detail::fmt_double(c.mean_iterations) << ','
                    << detail::fmt_double(c.mean_effective_streams);
            } else {
                out << ",,,,";
            }
            out << ',' << c.trials << ',' << c.failures << '\n';
        }
    }
}

/// Per-iteration trace CSV: iteration, sum_rate, mse_objective, then mu_k and
/// effective_streams_k per user.
inline void write_trace_csv(const IterationTrace& trace, int K,
                            const std::filesystem::path& path) {
    std::ofstream out = detail::open_out(path);
    out << "iteration,sum_rate,mse_objective";
    for (int k = 1; k <= K; ++k) out << ",mu_" << k;
    for (int k = 1; k <= K; ++k) out << ",effective_streams_" << k;
    out << '\n';
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const IterationRecord& r = trace.records[i];
        out << (i + 1) << ',' << detail::fmt_double(r.sum_rate) << ','
            << detail::fmt_double(r.mse_objective);
        for (int k = 0; k < K; ++k)
            out << ',' << detail::fmt_double(k < r.mu.size() ? r.mu(k) : 0.0);
        for (int k = 0; k < K; ++k)
            out << ','
                << (k < static_cast<int>(r.effective_streams.size())
                        ? r.effective_streams[static_cast<std::size_t>(k)]
                        : 0);
        out << '\n';
    }
}

/// Machine-readable run manifest: scenario echo, effective seed, versions and
/// a timestamp (the only field that differs between identical reruns).
inline void write_manifest(const ScenarioSpec& spec, const std::filesystem::path& path) {
    nlohmann::json j;
    j["scenario"] = scenario_to_json(spec);
    j["seed"] = spec.seed;
    j["versions"] = {{"reprec", "0.1.0"},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                   std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)}};
    const auto now = std::chrono::system_clock::now();
    j["timestamp_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
    std::ofstream out = detail::open_out(path);
    out << j.dump(2) << '\n';
}

/// Writes sweep.csv and manifest.json into out_dir (created if needed).
inline void emit_results(const SweepResult& sweep, const ScenarioSpec& spec,
                         const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("emit_results: cannot create directory " + out_dir.string());
    write_sweep_csv(sweep, out_dir / "sweep.csv");
    write_manifest(spec, out_dir / "manifest.json");
}

}  // namespace reprec
