#include "reprec/report.hpp"
#include "reprec/scenario.hpp"
#include "reprec/sweep.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace reprec;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioSpec tiny_scenario() {
    ScenarioSpec spec;
    spec.K = 2;
    spec.n_t = {2, 2};
    spec.n_r = {2, 2};
    spec.alpha = 0.5;
    spec.snr_grid_db = {0.0, 10.0};
    spec.trials = 3;
    spec.seed = 4242;
    spec.algorithms = {Variant::reconfigurable, Variant::max_sinr};
    spec.settings.max_iterations = 40;
    return spec;
}

}  // namespace

TEST_CASE("parse_scenario: minimal file applies defaults") {
    const auto path = std::filesystem::temp_directory_path() / "reprec_min.json";
    {
        std::ofstream out(path);
        out << R"({"K": 3, "n_t": 4, "n_r": 4})";
    }
    const ScenarioSpec spec = parse_scenario(path.string());
    REQUIRE(spec.K == 3);
    REQUIRE(spec.n_t == std::vector<int>{4, 4, 4});
    REQUIRE(spec.alpha == 1.0);
    REQUIRE(spec.kappa == 0.0);
    REQUIRE(spec.trials == 100);
    REQUIRE(spec.settings.convergence_tol == 1e-4);
    REQUIRE(spec.settings.max_iterations == 1000);
    std::filesystem::remove(path);
}

TEST_CASE("parse_scenario: errors name the offending part") {
    const auto check = [](const std::string& body, const std::string& needle) {
        const auto path = std::filesystem::temp_directory_path() / "reprec_bad.json";
        {
            std::ofstream out(path);
            out << body;
        }
        bool threw = false;
        try {
            parse_scenario(path.string());
        } catch (const std::invalid_argument& e) {
            threw = true;
            REQUIRE(std::string(e.what()).find(needle) != std::string::npos);
        }
        REQUIRE(threw);
        std::filesystem::remove(path);
    };

    check(R"({"K": 3, "n_t": 4, "n_r": 4, "trials": 0})", "trials");
    check(R"({"K": 3, "n_t": 4, "n_r": 4, "snr_grid_db": [10, 5]})", "snr_grid_db");
    check(R"({"K": 3, "n_t": 4, "n_r": 4, "frobnicate": 1})", "frobnicate");
    check(R"({"K": 3, "n_t": 4, "n_r": 4, "algorithms": ["bogus"]})", "bogus");
    check(R"({"n_t": 4, "n_r": 4})", "K");
    check(R"({"K": 2, "n_t": [4, 4, 4], "n_r": 4})", "n_t");
    check(R"({"K": 3, "n_t": 4)", "malformed");
}

TEST_CASE("aggregate_cell: averaging definition") {
    using detail::TrialSummary;
    SECTION("two values 4 and 6 give mean 5, stderr 1") {
        std::vector<TrialSummary> s(2);
        s[0].final_sum_rate = 4.0;
        s[0].converged = true;
        s[0].iterations_used = 10;
        s[1].final_sum_rate = 6.0;
        s[1].converged = true;
        s[1].iterations_used = 20;
        const SweepCell cell = detail::aggregate_cell(0.0, Variant::reconfigurable, s);
        REQUIRE(cell.mean_sum_rate == Catch::Approx(5.0));
        REQUIRE(cell.std_err == Catch::Approx(1.0));
        REQUIRE(cell.convergence_fraction == Catch::Approx(1.0));
        REQUIRE(cell.mean_iterations == Catch::Approx(15.0));
    }
    SECTION("single trial: stderr 0 by convention") {
        std::vector<TrialSummary> s(1);
        s[0].final_sum_rate = 3.5;
        const SweepCell cell = detail::aggregate_cell(0.0, Variant::myopic, s);
        REQUIRE(cell.mean_sum_rate == Catch::Approx(3.5));
        REQUIRE(cell.std_err == 0.0);
    }
    SECTION("failures excluded from the mean, tallied, fractions sum to one") {
        std::vector<TrialSummary> s(4);
        s[0].final_sum_rate = 2.0;
        s[0].converged = true;
        s[1].failed = true;
        s[2].final_sum_rate = 4.0;
        s[2].converged = false;
        s[3].final_sum_rate = 6.0;
        s[3].converged = true;
        const SweepCell cell = detail::aggregate_cell(0.0, Variant::reconfigurable, s);
        REQUIRE(cell.mean_sum_rate == Catch::Approx(4.0));
        REQUIRE(cell.failures == 1);
        const double conv = cell.convergence_fraction;                 // 2/4
        const double fail = static_cast<double>(cell.failures) / 4.0;  // 1/4
        const double nonconv = 1.0 - conv - fail;                      // 1/4
        REQUIRE(conv == Catch::Approx(0.5));
        REQUIRE(nonconv == Catch::Approx(0.25));
    }
    SECTION("all failed: cell absent") {
        std::vector<TrialSummary> s(2);
        s[0].failed = true;
        s[1].failed = true;
        const SweepCell cell = detail::aggregate_cell(0.0, Variant::reconfigurable, s);
        REQUIRE_FALSE(cell.present);
        REQUIRE(cell.failures == 2);
    }
}

TEST_CASE("estimate_multiplexing_gain: planted slopes") {
    SweepResult sweep;
    sweep.snr_grid_db = {0, 5, 10, 15, 20, 25, 30};
    sweep.algorithms = {Variant::reconfigurable};
    const auto make_cells = [&](auto fn) {
        sweep.cells.clear();
        for (double snr : sweep.snr_grid_db) {
            SweepCell c;
            c.snr_db = snr;
            c.variant = Variant::reconfigurable;
            c.present = true;
            c.mean_sum_rate = fn(std::pow(10.0, snr / 10.0));
            sweep.cells.push_back(c);
        }
    };

    SECTION("exact line R = 3 log2(P)") {
        make_cells([](double p) { return 3.0 * std::log2(p); });
        REQUIRE(estimate_multiplexing_gain(sweep, Variant::reconfigurable, 0.0, 30.0) ==
                Catch::Approx(3.0).margin(1e-12));
    }
    SECTION("flat R gives slope 0") {
        make_cells([](double) { return 7.0; });
        REQUIRE(estimate_multiplexing_gain(sweep, Variant::reconfigurable, 0.0, 30.0) ==
                Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("noisy line recovered within tolerance") {
        Rng rng(5);
        std::vector<double> noise;
        make_cells([&](double p) { return 1.5 * std::log2(p); });
        for (auto& c : sweep.cells) c.mean_sum_rate += 0.01 * (rng.uniform01() - 0.5) * 2.0;
        const double slope = estimate_multiplexing_gain(sweep, Variant::reconfigurable, 0.0, 30.0);
        REQUIRE(std::abs(slope - 1.5) < 0.05);
    }
    SECTION("window restriction and the two-point minimum") {
        make_cells([](double p) { return 2.0 * std::log2(p); });
        REQUIRE(estimate_multiplexing_gain(sweep, Variant::reconfigurable, 20.0, 30.0) ==
                Catch::Approx(2.0).margin(1e-12));
        REQUIRE_THROWS_AS(estimate_multiplexing_gain(sweep, Variant::reconfigurable, 29.0, 30.0),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(estimate_multiplexing_gain(sweep, Variant::myopic, 0.0, 30.0),
                          std::invalid_argument);
    }
}

TEST_CASE("run_trial: determinism and algorithm sharing") {
    ScenarioSpec spec = tiny_scenario();

    SECTION("same inputs give identical outputs") {
        const TrialResult a = run_trial(spec, 10.0, 1, 2);
        const TrialResult b = run_trial(spec, 10.0, 1, 2);
        REQUIRE(a.outcomes.size() == b.outcomes.size());
        for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
            REQUIRE(a.outcomes[i].final_sum_rate == b.outcomes[i].final_sum_rate);
            REQUIRE(a.outcomes[i].trace.iterations_used == b.outcomes[i].trace.iterations_used);
        }
    }
    SECTION("single algorithm gives single entry") {
        spec.algorithms = {Variant::reconfigurable};
        const TrialResult r = run_trial(spec, 0.0, 0, 0);
        REQUIRE(r.outcomes.size() == 1);
    }
    SECTION("alpha=0: reconfigurable and myopic produce identical results") {
        spec.alpha = 0.0;
        spec.algorithms = {Variant::reconfigurable, Variant::myopic};
        const TrialResult r = run_trial(spec, 10.0, 0, 0);
        REQUIRE(r.outcomes[0].final_sum_rate == r.outcomes[1].final_sum_rate);
        REQUIRE(r.outcomes[0].trace.records.size() == r.outcomes[1].trace.records.size());
        for (std::size_t i = 0; i < r.outcomes[0].trace.records.size(); ++i)
            REQUIRE(r.outcomes[0].trace.records[i].sum_rate ==
                    r.outcomes[1].trace.records[i].sum_rate);
    }
}

TEST_CASE("ergodic_sweep: parallelism does not change results") {
    const ScenarioSpec spec = tiny_scenario();
    const SweepResult s1 = ergodic_sweep(spec, 1);
    const SweepResult s2 = ergodic_sweep(spec, 2);
    REQUIRE(s1.cells.size() == s2.cells.size());
    for (std::size_t i = 0; i < s1.cells.size(); ++i) {
        REQUIRE(s1.cells[i].mean_sum_rate == s2.cells[i].mean_sum_rate);
        REQUIRE(s1.cells[i].std_err == s2.cells[i].std_err);
        REQUIRE(s1.cells[i].mean_iterations == s2.cells[i].mean_iterations);
    }
}

TEST_CASE("emit_results: CSV shape, determinism, trace length") {
    const ScenarioSpec spec = tiny_scenario();
    const SweepResult sweep = ergodic_sweep(spec, 2);

    const auto dir = std::filesystem::temp_directory_path() / "reprec_out";
    emit_results(sweep, spec, dir);
    const std::string csv1 = slurp(dir / "sweep.csv");

    SECTION("cardinality: 2 snr x 2 algorithms -> 4 data rows, LF line endings") {
        REQUIRE(csv1.find('\r') == std::string::npos);
        int lines = 0;
        for (char c : csv1)
            if (c == '\n') ++lines;
        REQUIRE(lines == 5);  // header + 4 cells
        REQUIRE(csv1.rfind("snr_db,algorithm,mean_sum_rate_bps_hz,std_err,convergence_fraction,"
                           "mean_iterations,mean_effective_streams,trials,failures\n",
                           0) == 0);
    }

    SECTION("rerun is byte-identical in the data file") {
        emit_results(sweep, spec, dir);
        REQUIRE(slurp(dir / "sweep.csv") == csv1);
        // manifest differs only in its timestamp field
        REQUIRE(slurp(dir / "manifest.json").find("timestamp_unix_ms") != std::string::npos);
    }

    SECTION("a cell with no surviving trials keeps its row with empty statistics") {
        SweepResult synthetic;
        synthetic.snr_grid_db = {0.0};
        synthetic.algorithms = {Variant::reconfigurable};
        SweepCell cell;
        cell.snr_db = 0.0;
        cell.variant = Variant::reconfigurable;
        cell.present = false;
        cell.trials = 4;
        cell.failures = 4;
        synthetic.cells = {cell};
        write_sweep_csv(synthetic, dir / "absent.csv");
        const std::string csv = slurp(dir / "absent.csv");
        REQUIRE(csv.find("0,reconfigurable,,,,,,4,4\n") != std::string::npos);
    }

    SECTION("trace CSV has one row per iteration") {
        const TrialResult tr = run_trial(spec, 10.0, 1, 0);
        const auto& trace = tr.outcomes[0].trace;
        write_trace_csv(trace, spec.K, dir / "trace.csv");
        const std::string tcsv = slurp(dir / "trace.csv");
        int lines = 0;
        for (char c : tcsv)
            if (c == '\n') ++lines;
        REQUIRE(lines == trace.iterations_used + 1);
        REQUIRE(tcsv.rfind("iteration,sum_rate,mse_objective,mu_1,mu_2,"
                           "effective_streams_1,effective_streams_2\n",
                           0) == 0);
    }

    std::filesystem::remove_all(dir);
}
