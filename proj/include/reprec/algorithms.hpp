#pragma once

#include "reprec/network.hpp"

#include <optional>
#include <string>
#include <vector>

namespace reprec {

enum class Variant { reconfigurable, myopic, max_sinr, max_sinr_genie };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::reconfigurable: return "reconfigurable";
        case Variant::myopic: return "myopic";
        case Variant::max_sinr: return "max_sinr";
        case Variant::max_sinr_genie: return "max_sinr_genie";
    }
    return "?";
}

inline std::optional<Variant> variant_from_name(const std::string& s) {
    if (s == "reconfigurable") return Variant::reconfigurable;
    if (s == "myopic") return Variant::myopic;
    if (s == "max_sinr") return Variant::max_sinr;
    if (s == "max_sinr_genie") return Variant::max_sinr_genie;
    return std::nullopt;
}

struct AlgorithmSettings {
    int max_iterations = 1000;
    double convergence_tol = 1e-4;   // absolute, on the algorithm's objective
    double bisection_tol = 1e-6;     // relative, on the power-constraint trace
    Variant variant = Variant::reconfigurable;

    void validate() const {
        if (max_iterations < 1)
            throw std::invalid_argument("AlgorithmSettings: max_iterations must be >= 1");
        if (!(convergence_tol > 0.0) || !(bisection_tol > 0.0))
            throw std::invalid_argument("AlgorithmSettings: tolerances must be positive");
    }
};

struct IterationRecord {
    double sum_rate = 0.0;
    double mse_objective = 0.0;
    double objective = 0.0;  // convergence objective (sum rate; total SINR for max-SINR)
    rvec mu;                 // reverse-network Lagrange parameters (zero for max-SINR)
    std::vector<int> effective_streams;  // strictly positive powers per user
};

struct IterationTrace {
    std::vector<IterationRecord> records;
    bool converged = false;
    int iterations_used = 0;
    int degenerate_streams = 0;  // zero filter columns replaced by random directions
};

struct RunResult {
    std::vector<TxState> tx;
    std::vector<RxState> rx;
    IterationTrace trace;
};

// Stream pruning schedule for the reconfigurable variants. Zero-power streams
// are recorded from kStreamMarkIteration on and removed from
// kStreamPruneIteration on; the first iterations are left untouched so
// transient zero allocations (common right after a cold start) do not lock in.
inline constexpr int kStreamMarkIteration = 8;
inline constexpr int kStreamPruneIteration = 12;

namespace detail {

/// Column-wise normalization with the degenerate-stream policy: a zero column
/// is replaced by a random unit vector when an rng is supplied (the event is
/// counted), otherwise it is an error.
inline void normalize_or_replace(cmat& m, int user, Rng* rng, int* degenerate_count) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double nrm = m.col(j).norm();
        if (nrm > 0.0) {
            m.col(j) /= nrm;
        } else if (rng != nullptr) {
            m.col(j) = rng->unit_vector(m.rows());
            if (degenerate_count != nullptr) ++*degenerate_count;
        } else {
            throw degenerate_stream_error(user, static_cast<int>(j));
        }
    }
}

}  // namespace detail

/// Forward-network pass: for every receiver, B_k from the current transmit
/// state and the normalized per-stream MMSE filters U_k = B_k^{-1} H_kk V_k.
inline std::vector<RxState> forward_update(const ChannelSet& ch, const std::vector<TxState>& tx,
                                           const NetworkConfig& cfg, Rng* degenerate_rng = nullptr,
                                           int* degenerate_count = nullptr) {
    std::vector<RxState> rx;
    rx.reserve(static_cast<std::size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k) {
        const cmat b = received_covariance(k, ch, tx, cfg);
        const Eigen::LLT<cmat> llt(b);
        cmat u;
        if (llt.info() == Eigen::Success) {
            u = llt.solve(ch.at(k, k) * tx[static_cast<std::size_t>(k)].V);
        } else {
            const HermEig eig = hermitian_eig_clamped(b);
            u = eig.vectors * eig.values.cwiseInverse().asDiagonal() * eig.vectors.adjoint() *
                (ch.at(k, k) * tx[static_cast<std::size_t>(k)].V);
        }
        detail::normalize_or_replace(u, k, degenerate_rng, degenerate_count);
        rx.push_back(RxState{std::move(u), interference_noise_covariance(k, ch, tx, cfg)});
    }
    return rx;
}

struct ReverseUpdate {
    std::vector<cmat> G;  // unit-norm columns
    rvec mu;              // Lagrange parameter per transmitter
};

// Diagonal load floor of the reverse covariance, as a multiple of the noise
// variance. A strictly positive floor is required: with a bare Lagrange load
// the update degenerates to a zero-forcing map whenever the power constraint
// is slack and the iteration stalls short of the single-user waterfilling
// solution. The factor 2 damps the slow interference-alignment mode under
// strong coupling (measurably better settling than 1 within the iteration
// cap) while leaving every fixed point unchanged.
inline constexpr double kReverseLoadFactor = 2.0;

/// Reciprocal-network MMSE update. For each transmitter k the reverse covariance is
///   Btilde_k = sum_l (P/d_l) H_lk^H U_l U_l^H H_lk + (load_k + mu_k) I
/// with load_k = kReverseLoadFactor * sigma_k^2, the unnormalized filter is
/// E_k = Btilde_k^{-1} H_kk^H U_k, and mu_k >= 0 is chosen by complementary
/// slackness so that tr(E_k^H E_k) <= P, with equality when mu_k > 0
/// (bracketing by doubling, then bisection).
inline ReverseUpdate reverse_mmse_update(const ChannelSet& ch, const std::vector<RxState>& rx,
                                         const NetworkConfig& cfg, const std::vector<int>& d_list,
                                         double bisection_tol = 1e-6, Rng* degenerate_rng = nullptr,
                                         int* degenerate_count = nullptr) {
    if (static_cast<int>(rx.size()) != cfg.K || static_cast<int>(d_list.size()) != cfg.K)
        throw std::invalid_argument("reverse_mmse_update: state count mismatch");

    const double p_budget = cfg.power_budget;
    ReverseUpdate out;
    out.G.reserve(static_cast<std::size_t>(cfg.K));
    out.mu = rvec::Zero(cfg.K);

    for (int k = 0; k < cfg.K; ++k) {
        const int nt = cfg.n_t[static_cast<std::size_t>(k)];
        const double load = kReverseLoadFactor * cfg.noise_var[static_cast<std::size_t>(k)];
        cmat a = cmat::Zero(nt, nt);
        for (int l = 0; l < cfg.K; ++l) {
            const cmat y = ch.at(l, k).adjoint() * rx[static_cast<std::size_t>(l)].U;
            a.noalias() += (p_budget / static_cast<double>(d_list[static_cast<std::size_t>(l)])) *
                           (y * y.adjoint());
        }

        Eigen::SelfAdjointEigenSolver<cmat> es(0.5 * (a + a.adjoint()));
        if (es.info() != Eigen::Success)
            throw numerical_failure("reverse_mmse_update: eigensolver failed", k);
        const rvec w = es.eigenvalues().cwiseMax(0.0);
        const cmat& s = es.eigenvectors();
        const cmat c = ch.at(k, k).adjoint() * rx[static_cast<std::size_t>(k)].U;
        const cmat ct = s.adjoint() * c;  // c in the eigenbasis of a
        const rvec c2 = ct.cwiseAbs2().rowwise().sum();

        const auto trace_at = [&](double mu) {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < w.size(); ++i) {
                if (c2(i) == 0.0) continue;
                const double den = w(i) + load + mu;
                acc += c2(i) / (den * den);
            }
            return acc;
        };

        double mu = 0.0;
        if (trace_at(0.0) > p_budget) {
            double hi = 1.0;
            int doublings = 0;
            while (trace_at(hi) > p_budget) {
                hi *= 2.0;
                if (++doublings > 200)
                    throw numerical_failure("reverse_mmse_update: bisection failed to bracket", k);
            }
            double lo = 0.0;
            for (int iter = 0; iter < 500; ++iter) {
                const double mid = 0.5 * (lo + hi);
                if (trace_at(mid) > p_budget) lo = mid; else hi = mid;
                if (std::abs(trace_at(hi) - p_budget) <= bisection_tol * p_budget) break;
            }
            mu = hi;  // feasible side: trace <= P
        }

        cmat e = s * ((w.array() + load + mu).inverse().matrix().asDiagonal() * ct);
        detail::normalize_or_replace(e, k, degenerate_rng, degenerate_count);
        out.G.push_back(std::move(e));
        out.mu(k) = mu;
    }
    return out;
}

/// Cross-iteration bookkeeping for implicit stream-count reduction.
struct StreamPruner {
    std::vector<std::vector<bool>> dead;  // per user, per current stream
    int iteration = 0;
};

/// Reciprocal-network waterfilling step. Transmitters are processed in order, each
/// waterfilling against the freshest interference state (users before it in
/// the sweep have already updated). For each k:
///   Q_k^{-1/2} H_kk G_k = W L F^H,  V_k = G_k F_k,  P_k = water_fill(L^2, P).
/// The myopic variant replaces Q_k by sigma^2 I. When a pruner is supplied,
/// streams that waterfill to zero are marked and eventually removed.
inline std::vector<TxState> wf_step(const ChannelSet& ch, const std::vector<cmat>& g_list,
                                    const std::vector<TxState>& tx, const NetworkConfig& cfg,
                                    Variant variant, StreamPruner* pruner = nullptr) {
    if (static_cast<int>(g_list.size()) != cfg.K)
        throw std::invalid_argument("wf_step: G count mismatch");
    const bool myopic = (variant == Variant::myopic);

    std::vector<TxState> work = tx;
    for (int k = 0; k < cfg.K; ++k) {
        const std::size_t uk = static_cast<std::size_t>(k);
        const int nr = cfg.n_r[uk];
        const double sigma2 = cfg.noise_var[uk];
        cmat q_eff;
        if (myopic) {
            q_eff = sigma2 * cmat::Identity(nr, nr);
        } else {
            q_eff = interference_noise_covariance(k, ch, work, cfg);
        }
        const cmat whitener = hermitian_inv_sqrt(q_eff);
        const SvdResult sv = svd(whitener * ch.at(k, k) * g_list[uk]);

        const Eigen::Index d = g_list[uk].cols();
        rvec gains = rvec::Zero(d);
        for (Eigen::Index i = 0; i < sv.singular_values.size() && i < d; ++i)
            gains(i) = sv.singular_values(i) * sv.singular_values(i);
        const WaterfillResult wf = water_fill(gains, cfg.power_budget);

        TxState next;
        next.G = g_list[uk];
        next.F = sv.right;  // d x d
        next.V = next.G * next.F;
        next.p_alloc = wf.powers;
        next.d = static_cast<int>(d);

        if (pruner != nullptr) {
            auto& dead = pruner->dead[uk];
            dead.resize(static_cast<std::size_t>(d), false);
            if (pruner->iteration >= kStreamMarkIteration) {
                for (Eigen::Index n = 0; n < d; ++n)
                    if (next.p_alloc(n) <= 0.0) dead[static_cast<std::size_t>(n)] = true;
            }
            if (pruner->iteration >= kStreamPruneIteration) {
                Eigen::Index alive = 0;
                for (bool dd : dead) alive += dd ? 0 : 1;
                if (alive > 0 && alive < d) {
                    cmat v_new(next.V.rows(), alive), g_new(next.G.rows(), alive);
                    rvec p_new(alive);
                    std::vector<bool> dead_new(static_cast<std::size_t>(alive), false);
                    Eigen::Index j = 0;
                    for (Eigen::Index n = 0; n < d; ++n) {
                        if (dead[static_cast<std::size_t>(n)]) continue;
                        v_new.col(j) = next.V.col(n);
                        g_new.col(j) = next.G.col(n);
                        p_new(j) = next.p_alloc(n);
                        ++j;
                    }
                    next.V = std::move(v_new);
                    next.G = std::move(g_new);
                    next.F = cmat();  // column subset of a unitary factor is not stored
                    next.p_alloc = std::move(p_new);
                    next.d = static_cast<int>(alive);
                    dead = std::move(dead_new);
                }
            }
        }
        work[uk] = std::move(next);
    }
    return work;
}

namespace detail {

inline std::vector<TxState> random_init(const NetworkConfig& cfg, const std::vector<int>& d,
                                        Rng& rng) {
    std::vector<TxState> tx(static_cast<std::size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k) {
        const std::size_t uk = static_cast<std::size_t>(k);
        cmat v = rng.complex_gaussian(cfg.n_t[uk], d[uk]);
        normalize_columns(v);
        tx[uk].V = v;
        tx[uk].G = v;
        tx[uk].F = cmat::Identity(d[uk], d[uk]);
        tx[uk].p_alloc = rvec::Constant(d[uk], cfg.power_budget / static_cast<double>(d[uk]));
        tx[uk].d = d[uk];
    }
    return tx;
}

inline std::vector<int> effective_streams(const std::vector<TxState>& tx) {
    std::vector<int> eff;
    eff.reserve(tx.size());
    for (const TxState& t : tx)
        eff.push_back(static_cast<int>((t.p_alloc.array() > 0.0).count()));
    return eff;
}

}  // namespace detail

/// The reconfigurable precoding loop and its myopic variant. Starts from
/// d_k = min(n_t, n_r) streams with random unit-norm precoder columns and
/// equal powers, then alternates the forward MMSE pass, the reciprocal MMSE
/// update, and the waterfilling step until the sum rate settles. Stream
/// counts adapt implicitly: zero-power streams are pruned (schedule above).
inline RunResult run_reconfigurable(const ChannelSet& ch, const NetworkConfig& cfg,
                                    const AlgorithmSettings& settings, Rng& rng) {
    cfg.validate();
    settings.validate();
    if (settings.variant != Variant::reconfigurable && settings.variant != Variant::myopic)
        throw std::invalid_argument("run_reconfigurable: unexpected variant");

    std::vector<int> d(static_cast<std::size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k)
        d[static_cast<std::size_t>(k)] = std::min(cfg.n_t[static_cast<std::size_t>(k)],
                                                  cfg.n_r[static_cast<std::size_t>(k)]);
    std::vector<TxState> tx = detail::random_init(cfg, d, rng);

    StreamPruner pruner;
    pruner.dead.assign(static_cast<std::size_t>(cfg.K), {});

    RunResult result;
    IterationTrace& trace = result.trace;
    std::vector<RxState> rx;

    for (int it = 1; it <= settings.max_iterations; ++it) {
        try {
            rx = forward_update(ch, tx, cfg, &rng, &trace.degenerate_streams);
            const double mse = system_mse(ch, tx, rx, cfg);

            const ReverseUpdate rev = reverse_mmse_update(ch, rx, cfg, d, settings.bisection_tol,
                                                          &rng, &trace.degenerate_streams);
            pruner.iteration = it;
            tx = wf_step(ch, rev.G, tx, cfg, settings.variant, &pruner);
            for (int k = 0; k < cfg.K; ++k) d[static_cast<std::size_t>(k)] = tx[static_cast<std::size_t>(k)].d;

            IterationRecord rec;
            rec.sum_rate = sum_rate(ch, tx, cfg);
            rec.mse_objective = mse;
            rec.objective = rec.sum_rate;
            rec.mu = rev.mu;
            rec.effective_streams = detail::effective_streams(tx);
            trace.records.push_back(std::move(rec));
        } catch (numerical_failure& e) {
            e.set_iteration(it);
            throw;
        }

        trace.iterations_used = it;
        const std::size_t n = trace.records.size();
        if (n >= 2 && std::abs(trace.records[n - 1].objective - trace.records[n - 2].objective) <
                          settings.convergence_tol) {
            trace.converged = true;
            break;
        }
    }

    result.tx = std::move(tx);
    result.rx = forward_update(ch, result.tx, cfg, &rng, &trace.degenerate_streams);
    return result;
}

namespace detail {

/// One direction of the per-stream SINR-maximizing update. For each user and
/// stream: B = T - (P/d_k) h h^H with T the total covariance under equal
/// per-stream powers P/d_l, filter = B^{-1} h normalized. Returns the
/// accumulated per-stream SINR when requested.
inline double max_sinr_direction(const ChannelSet& ch, const NetworkConfig& cfg,
                                 const std::vector<cmat>& from, std::vector<cmat>& to,
                                 const std::vector<int>& d, bool reverse, bool accumulate_sinr,
                                 Rng* rng, int* degen) {
    double obj = 0.0;
    for (int k = 0; k < cfg.K; ++k) {
        const std::size_t uk = static_cast<std::size_t>(k);
        const int dim = reverse ? cfg.n_t[uk] : cfg.n_r[uk];
        const double own_power = cfg.power_budget / static_cast<double>(d[uk]);
        cmat t = cfg.noise_var[uk] * cmat::Identity(dim, dim);
        for (int l = 0; l < cfg.K; ++l) {
            const std::size_t ul = static_cast<std::size_t>(l);
            const cmat x = reverse ? cmat(ch.at(l, k).adjoint() * from[ul])
                                   : cmat(ch.at(k, l) * from[ul]);
            t.noalias() += (cfg.power_budget / static_cast<double>(d[ul])) * (x * x.adjoint());
        }
        const cmat hk = reverse ? cmat(ch.at(k, k).adjoint() * from[uk])
                                : cmat(ch.at(k, k) * from[uk]);
        cmat filt(dim, d[uk]);
        for (int n = 0; n < d[uk]; ++n) {
            const cvec h = hk.col(n);
            const cmat b = t - own_power * (h * h.adjoint());
            const Eigen::LLT<cmat> llt(b);
            cvec u;
            if (llt.info() == Eigen::Success) {
                u = llt.solve(h);
            } else {
                const HermEig eig = hermitian_eig_clamped(b);
                u = eig.vectors * eig.values.cwiseInverse().asDiagonal() *
                    (eig.vectors.adjoint() * h);
            }
            const double nrm = u.norm();
            if (nrm > 0.0) {
                u /= nrm;
            } else if (rng != nullptr) {
                u = rng->unit_vector(dim);
                if (degen != nullptr) ++*degen;
            } else {
                throw degenerate_stream_error(k, n);
            }
            filt.col(n) = u;
            if (accumulate_sinr) {
                const cx num = u.adjoint() * h;
                const double den = std::real((u.adjoint() * b * u)(0, 0));
                obj += own_power * std::norm(num) / den;
            }
        }
        to[uk] = std::move(filt);
    }
    return obj;
}

}  // namespace detail

/// Distributed per-stream SINR maximization (Max-SINR baseline) with equal
/// power P/d per stream throughout. The plain variant uses the IA-feasible
/// stream count d_k = 2 (capped by the antenna counts); the genie-aided
/// variant transmits the full d_k = min(n_t, n_r). Convergence is declared on
/// the total per-stream SINR objective.
inline RunResult run_max_sinr(const ChannelSet& ch, const NetworkConfig& cfg,
                              const AlgorithmSettings& settings, Rng& rng) {
    cfg.validate();
    settings.validate();
    if (settings.variant != Variant::max_sinr && settings.variant != Variant::max_sinr_genie)
        throw std::invalid_argument("run_max_sinr: unexpected variant");
    const bool genie = settings.variant == Variant::max_sinr_genie;

    std::vector<int> d(static_cast<std::size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k) {
        const std::size_t uk = static_cast<std::size_t>(k);
        const int full = std::min(cfg.n_t[uk], cfg.n_r[uk]);
        d[uk] = genie ? full : std::min(2, full);
    }

    std::vector<TxState> tx = detail::random_init(cfg, d, rng);
    std::vector<cmat> v(static_cast<std::size_t>(cfg.K)), u(static_cast<std::size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k) v[static_cast<std::size_t>(k)] = tx[static_cast<std::size_t>(k)].V;

    RunResult result;
    IterationTrace& trace = result.trace;

    for (int it = 1; it <= settings.max_iterations; ++it) {
        const double obj =
            detail::max_sinr_direction(ch, cfg, v, u, d, /*reverse=*/false,
                                       /*accumulate_sinr=*/true, &rng, &trace.degenerate_streams);
        std::vector<RxState> rx;
        rx.reserve(static_cast<std::size_t>(cfg.K));
        for (int k = 0; k < cfg.K; ++k)
            rx.push_back(RxState{u[static_cast<std::size_t>(k)],
                                 interference_noise_covariance(k, ch, tx, cfg)});
        const double mse = system_mse(ch, tx, rx, cfg);

        detail::max_sinr_direction(ch, cfg, u, v, d, /*reverse=*/true,
                                   /*accumulate_sinr=*/false, &rng, &trace.degenerate_streams);
        for (int k = 0; k < cfg.K; ++k) {
            const std::size_t uk = static_cast<std::size_t>(k);
            tx[uk].V = v[uk];
            tx[uk].G = v[uk];
        }

        IterationRecord rec;
        rec.sum_rate = sum_rate(ch, tx, cfg);
        rec.mse_objective = mse;
        rec.objective = obj;
        rec.mu = rvec::Zero(cfg.K);
        rec.effective_streams = detail::effective_streams(tx);
        trace.records.push_back(std::move(rec));

        trace.iterations_used = it;
        const std::size_t n = trace.records.size();
        if (n >= 2 && std::abs(trace.records[n - 1].objective - trace.records[n - 2].objective) <
                          settings.convergence_tol) {
            trace.converged = true;
            break;
        }
    }

    result.tx = std::move(tx);
    std::vector<cmat> u_final(static_cast<std::size_t>(cfg.K));
    detail::max_sinr_direction(ch, cfg, v, u_final, d, /*reverse=*/false,
                               /*accumulate_sinr=*/false, &rng, &trace.degenerate_streams);
    result.rx.reserve(static_cast<std::size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k)
        result.rx.push_back(RxState{std::move(u_final[static_cast<std::size_t>(k)]),
                                    interference_noise_covariance(k, ch, result.tx, cfg)});
    return result;
}

inline RunResult run_algorithm(const ChannelSet& ch, const NetworkConfig& cfg,
                               const AlgorithmSettings& settings, Rng& rng) {
    switch (settings.variant) {
        case Variant::reconfigurable:
        case Variant::myopic:
            return run_reconfigurable(ch, cfg, settings, rng);
        case Variant::max_sinr:
        case Variant::max_sinr_genie:
            return run_max_sinr(ch, cfg, settings, rng);
    }
    throw std::invalid_argument("run_algorithm: unknown variant");
}

}  // namespace reprec
