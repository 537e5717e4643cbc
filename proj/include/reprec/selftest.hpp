#pragma once

// Built-in property and oracle checks, exposed through the CLI `selftest`
// subcommand so an installed binary can vouch for itself without the full
// development test suite.

#include "reprec/reprec.hpp"

#include <cstdio>
#include <string>

namespace reprec {

namespace detail {

inline bool check(bool ok, const char* name, int& failures) {
    std::printf("%s %s\n", ok ? "ok  " : "FAIL", name);
    if (!ok) ++failures;
    return ok;
}

}  // namespace detail

inline int run_selftest() {
    int failures = 0;
    using detail::check;

    {  // waterfilling against a 1-D grid oracle and its KKT structure
        rvec g(2);
        g << 2.0, 1.0;
        const WaterfillResult r = water_fill(g, 1.0);
        double best = -1.0, best_p1 = 0.0;
        for (int i = 0; i <= 100000; ++i) {
            const double p1 = i * 1e-5;
            const double val = std::log2(1.0 + 2.0 * p1) + std::log2(1.0 + (1.0 - p1));
            if (val > best) {
                best = val;
                best_p1 = p1;
            }
        }
        check(std::abs(r.powers(0) - 0.75) < 1e-12 && std::abs(best_p1 - 0.75) < 1e-4,
              "water_fill matches grid-search oracle", failures);

        Rng rng(101);
        bool ok = true;
        for (int rep = 0; rep < 200 && ok; ++rep) {
            const int n = 1 + static_cast<int>(rng.uniform01() * 8);
            rvec gains(n);
            for (int i = 0; i < n; ++i) gains(i) = 5.0 * rng.uniform01();
            const double budget = 0.1 + 5.0 * rng.uniform01();
            const WaterfillResult w = water_fill(gains, budget);
            if (w.active_count > 0 && std::abs(w.powers.sum() - budget) > 1e-9 * budget) ok = false;
            for (int i = 0; i < n; ++i)
                if (w.powers(i) > 0.0 &&
                    std::abs(w.powers(i) - (w.water_level - 1.0 / gains(i))) > 1e-9)
                    ok = false;
        }
        check(ok, "water_fill invariants on random inputs", failures);
    }

    {  // SVD reconstruction and inverse square root identity
        Rng rng(102);
        bool ok = true;
        for (int rep = 0; rep < 20 && ok; ++rep) {
            const cmat a = rng.complex_gaussian(4, 3);
            const SvdResult sv = svd(a);
            cmat sigma = cmat::Zero(4, 3);
            for (Eigen::Index i = 0; i < sv.singular_values.size(); ++i)
                sigma(i, i) = sv.singular_values(i);
            if ((sv.left * sigma * sv.right.adjoint() - a).norm() > 1e-9) ok = false;

            const cmat x = rng.complex_gaussian(4, 4);
            const cmat m = x * x.adjoint() + 0.1 * cmat::Identity(4, 4);
            const cmat r = hermitian_inv_sqrt(m);
            if ((r * m * r - cmat::Identity(4, 4)).norm() > 1e-9) ok = false;
        }
        check(ok, "svd reconstruction and hermitian_inv_sqrt identity", failures);
    }

    {  // channel normalization: E||H||_F^2 = n_r * n_t
        ChannelParams params;
        params.kappa = 10.0;
        Rng rng(103);
        double acc = 0.0;
        const int draws = 2000;
        for (int i = 0; i < draws; ++i) acc += draw_ricean(3, 2, params, rng).squaredNorm();
        const double normalized = acc / draws / 6.0;
        check(normalized > 0.93 && normalized < 1.07, "Ricean channel power normalization",
              failures);
    }

    {  // structural identity B = Q + desired on a random network state
        NetworkConfig cfg;
        cfg.K = 3;
        cfg.n_t = {4, 4, 4};
        cfg.n_r = {4, 4, 4};
        cfg.power_budget = 10.0;
        cfg.noise_var = {1.0, 1.0, 1.0};
        ChannelParams params;
        Rng ch_rng(104);
        const ChannelSet ch = draw_channel_set(cfg.n_r, cfg.n_t, params, ch_rng);
        Rng rng(105);
        std::vector<TxState> tx;
        for (int k = 0; k < 3; ++k) {
            cmat v = rng.complex_gaussian(4, 4);
            normalize_columns(v);
            tx.push_back(TxState{v, v, cmat::Identity(4, 4), rvec::Constant(4, 2.5), 4});
        }
        bool ok = true;
        for (int k = 0; k < 3; ++k) {
            const cmat b = received_covariance(k, ch, tx, cfg);
            const cmat q = interference_noise_covariance(k, ch, tx, cfg);
            const cmat x = ch.at(k, k) * tx[static_cast<std::size_t>(k)].V;
            const cmat s = x * tx[static_cast<std::size_t>(k)].p_alloc.asDiagonal() * x.adjoint();
            if ((b - (q + s)).norm() > 1e-9) ok = false;
        }
        check(ok, "covariance identity B = Q + signal", failures);
    }

    {  // single-user reduction to waterfilled capacity
        NetworkConfig cfg;
        cfg.K = 1;
        cfg.n_t = {4};
        cfg.n_r = {4};
        cfg.power_budget = 10.0;
        cfg.noise_var = {1.0};
        AlgorithmSettings settings;
        settings.variant = Variant::reconfigurable;
        settings.convergence_tol = 1e-10;
        settings.max_iterations = 5000;
        bool ok = true;
        for (int rep = 0; rep < 2; ++rep) {
            ChannelParams params;
            params.kappa = rep == 0 ? 0.0 : 10.0;
            Rng ch_rng(200 + static_cast<std::uint64_t>(rep));
            ChannelSet ch;
            ch.K = 1;
            ch.matrices.push_back(draw_ricean(4, 4, params, ch_rng));
            Rng rng(300 + static_cast<std::uint64_t>(rep));
            const RunResult run = run_reconfigurable(ch, cfg, settings, rng);

            const SvdResult sv = svd(ch.matrices[0]);
            const rvec gains = sv.singular_values.cwiseAbs2();
            const WaterfillResult wf = water_fill(gains, cfg.power_budget);
            double capacity = 0.0;
            for (Eigen::Index i = 0; i < gains.size(); ++i)
                capacity += std::log2(1.0 + gains(i) * wf.powers(i));
            if (std::abs(run.trace.records.back().sum_rate - capacity) > 1e-6) ok = false;
        }
        check(ok, "single-user run matches waterfilled capacity", failures);
    }

    {  // trial determinism
        ScenarioSpec spec;
        spec.K = 2;
        spec.n_t = {2, 2};
        spec.n_r = {2, 2};
        spec.alpha = 0.5;
        spec.trials = 1;
        spec.algorithms = {Variant::reconfigurable, Variant::max_sinr};
        spec.settings.max_iterations = 50;
        const TrialResult a = run_trial(spec, 10.0, 0, 0);
        const TrialResult b = run_trial(spec, 10.0, 0, 0);
        bool ok = a.outcomes.size() == b.outcomes.size();
        for (std::size_t i = 0; ok && i < a.outcomes.size(); ++i)
            if (a.outcomes[i].final_sum_rate != b.outcomes[i].final_sum_rate) ok = false;
        check(ok, "run_trial determinism", failures);
    }

    std::printf(failures == 0 ? "selftest: all checks passed\n"
                              : "selftest: %d check(s) FAILED\n",
                failures);
    return failures;
}

}  // namespace reprec
