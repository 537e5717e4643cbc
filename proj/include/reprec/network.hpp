#pragma once

#include "reprec/channel.hpp"
#include "reprec/numerics.hpp"

#include <Eigen/Cholesky>

#include <vector>

namespace reprec {

struct NetworkConfig {
    int K = 0;
    std::vector<int> n_t;          // antennas per transmitter
    std::vector<int> n_r;          // antennas per receiver
    double power_budget = 1.0;     // total power P per transmitter
    std::vector<double> noise_var; // sigma^2 per receiver

    void validate() const {
        if (K < 1) throw std::invalid_argument("NetworkConfig: K must be >= 1");
        if (static_cast<int>(n_t.size()) != K || static_cast<int>(n_r.size()) != K ||
            static_cast<int>(noise_var.size()) != K)
            throw std::invalid_argument("NetworkConfig: per-user arrays must have length K");
        for (int v : n_t)
            if (v < 1) throw std::invalid_argument("NetworkConfig: antenna counts must be >= 1");
        for (int v : n_r)
            if (v < 1) throw std::invalid_argument("NetworkConfig: antenna counts must be >= 1");
        if (!(power_budget > 0.0))
            throw std::invalid_argument("NetworkConfig: power budget must be positive");
        for (double v : noise_var)
            if (!(v > 0.0)) throw std::invalid_argument("NetworkConfig: noise variance must be positive");
    }
};

/// Per-transmitter state: precoder V = G * F with unit-norm G columns, F from
/// the prewhitened SVD, and the per-stream power allocation (diagonal of P_k).
struct TxState {
    cmat V;        // n_t x d
    cmat G;        // n_t x d, unit-norm columns
    cmat F;        // d x d
    rvec p_alloc;  // length d, nonnegative, sum <= power budget
    int d = 0;
};

/// Per-receiver state: filter U with unit-norm columns and the interference-
/// plus-noise covariance Q at that receiver.
struct RxState {
    cmat U;  // n_r x d
    cmat Q;  // n_r x n_r Hermitian, eigenvalues >= sigma^2
};

namespace detail {

inline void check_dims(int k, const ChannelSet& ch, const std::vector<TxState>& tx,
                       const NetworkConfig& cfg) {
    if (ch.K != cfg.K || static_cast<int>(tx.size()) != cfg.K)
        throw std::invalid_argument("network: channel/state count mismatch");
    for (int l = 0; l < cfg.K; ++l) {
        const cmat& h = ch.at(k, l);
        if (h.rows() != cfg.n_r[static_cast<std::size_t>(k)] ||
            h.cols() != cfg.n_t[static_cast<std::size_t>(l)])
            throw std::invalid_argument("network: channel matrix shape mismatch");
        if (tx[static_cast<std::size_t>(l)].V.rows() != h.cols())
            throw std::invalid_argument("network: precoder/channel dimension mismatch");
        if (tx[static_cast<std::size_t>(l)].V.cols() != tx[static_cast<std::size_t>(l)].p_alloc.size())
            throw std::invalid_argument("network: precoder/power dimension mismatch");
    }
}

/// log(det(M)) for Hermitian positive definite M, via Cholesky with an
/// eigenvalue-clamp fallback for near-singular inputs.
inline double logdet_hermitian(const cmat& m) {
    Eigen::LLT<cmat> llt(m);
    if (llt.info() == Eigen::Success) {
        double acc = 0.0;
        const auto& l = llt.matrixLLT();
        for (Eigen::Index i = 0; i < m.rows(); ++i) acc += std::log(std::real(l(i, i)));
        return 2.0 * acc;
    }
    const HermEig eig = hermitian_eig_clamped(m);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) acc += std::log(eig.values(i));
    return acc;
}

}  // namespace detail

/// Received-signal covariance at Rx k: sum over all transmitters (including
/// the desired one) of H V P V^H H^H, plus the noise term.
inline cmat received_covariance(int k, const ChannelSet& ch, const std::vector<TxState>& tx,
                                const NetworkConfig& cfg) {
    detail::check_dims(k, ch, tx, cfg);
    const int nr = cfg.n_r[static_cast<std::size_t>(k)];
    cmat b = cfg.noise_var[static_cast<std::size_t>(k)] * cmat::Identity(nr, nr);
    for (int l = 0; l < cfg.K; ++l) {
        const cmat x = ch.at(k, l) * tx[static_cast<std::size_t>(l)].V;
        b.noalias() += x * tx[static_cast<std::size_t>(l)].p_alloc.asDiagonal() * x.adjoint();
    }
    return b;
}

/// Interference-plus-noise covariance at Rx k (desired transmitter excluded).
inline cmat interference_noise_covariance(int k, const ChannelSet& ch,
                                          const std::vector<TxState>& tx,
                                          const NetworkConfig& cfg) {
    detail::check_dims(k, ch, tx, cfg);
    const int nr = cfg.n_r[static_cast<std::size_t>(k)];
    cmat q = cfg.noise_var[static_cast<std::size_t>(k)] * cmat::Identity(nr, nr);
    for (int l = 0; l < cfg.K; ++l) {
        if (l == k) continue;
        const cmat x = ch.at(k, l) * tx[static_cast<std::size_t>(l)].V;
        q.noalias() += x * tx[static_cast<std::size_t>(l)].p_alloc.asDiagonal() * x.adjoint();
    }
    return q;
}

/// Instantaneous rate of user k in bits/s/Hz:
/// log2 det(I + H V P V^H H^H Q^{-1}), evaluated as a log-det difference of
/// two Hermitian PD matrices for stability.
inline double user_rate(int k, const ChannelSet& ch, const std::vector<TxState>& tx,
                        const NetworkConfig& cfg) {
    const cmat q = interference_noise_covariance(k, ch, tx, cfg);
    const cmat x = ch.at(k, k) * tx[static_cast<std::size_t>(k)].V;
    const cmat signal = x * tx[static_cast<std::size_t>(k)].p_alloc.asDiagonal() * x.adjoint();
    const double ld = detail::logdet_hermitian(q + signal) - detail::logdet_hermitian(q);
    return std::max(0.0, ld / std::log(2.0));
}

inline double sum_rate(const ChannelSet& ch, const std::vector<TxState>& tx,
                       const NetworkConfig& cfg) {
    double acc = 0.0;
    for (int k = 0; k < cfg.K; ++k) acc += user_rate(k, ch, tx, cfg);
    return acc;
}

/// System-wide mean squared error, closed form of
/// sum_k E||U_k^H y_k - s_k||^2 under E{s s^H} = I:
///   sum_k [ tr(U^H B U) - 2 Re tr(U^H H V P^{1/2}) + d_k ].
/// Accepts arbitrary (not necessarily unit-norm) receive filters.
inline double system_mse(const ChannelSet& ch, const std::vector<TxState>& tx,
                         const std::vector<RxState>& rx, const NetworkConfig& cfg) {
    if (static_cast<int>(rx.size()) != cfg.K)
        throw std::invalid_argument("system_mse: receiver state count mismatch");
    double acc = 0.0;
    for (int k = 0; k < cfg.K; ++k) {
        const cmat b = received_covariance(k, ch, tx, cfg);
        const cmat& u = rx[static_cast<std::size_t>(k)].U;
        const TxState& t = tx[static_cast<std::size_t>(k)];
        if (u.rows() != b.rows() || u.cols() != t.d)
            throw std::invalid_argument("system_mse: filter dimension mismatch");
        const cmat cross = u.adjoint() * ch.at(k, k) * t.V *
                           t.p_alloc.cwiseSqrt().asDiagonal();
        acc += std::real((u.adjoint() * b * u).trace()) - 2.0 * std::real(cross.trace()) +
               static_cast<double>(t.d);
    }
    return acc;
}

}  // namespace reprec
