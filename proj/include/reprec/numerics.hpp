#pragma once

#include "reprec/core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <numeric>
#include <vector>

namespace reprec {

/// Relative floor applied to eigenvalues before inversion: covariances are
/// positive definite by construction (noise variance > 0), but finite
/// precision can leave tiny negative residues at extreme SNR.
inline constexpr double kEigClampRel = 1e-12;

struct SvdResult {
    cmat left;          // m x m unitary
    rvec singular_values;  // min(m, n), sorted descending, >= 0
    cmat right;         // n x n unitary
};

/// Full singular value decomposition A = left * diag(singular_values) * right^H.
/// Column phases are fixed so the largest-magnitude entry of each left singular
/// vector is real nonnegative, which makes the output deterministic; the same
/// phase is applied to the paired right vector to keep the reconstruction exact.
inline SvdResult svd(const cmat& a) {
    if (!all_finite(a)) throw std::invalid_argument("svd: input has non-finite entries");

    Eigen::JacobiSVD<cmat> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SvdResult out;
    out.left = solver.matrixU();
    out.right = solver.matrixV();
    out.singular_values = solver.singularValues();

    const Eigen::Index r = std::min(a.rows(), a.cols());
    for (Eigen::Index j = 0; j < out.left.cols(); ++j) {
        Eigen::Index imax = 0;
        out.left.col(j).cwiseAbs().maxCoeff(&imax);
        const cx pivot = out.left(imax, j);
        const double mag = std::abs(pivot);
        if (mag == 0.0) continue;
        const cx phase = std::conj(pivot) / mag;
        out.left.col(j) *= phase;
        if (j < r) out.right.col(j) *= phase;
    }
    for (Eigen::Index j = r; j < out.right.cols(); ++j) {
        Eigen::Index imax = 0;
        out.right.col(j).cwiseAbs().maxCoeff(&imax);
        const cx pivot = out.right(imax, j);
        const double mag = std::abs(pivot);
        if (mag == 0.0) continue;
        out.right.col(j) *= std::conj(pivot) / mag;
    }
    return out;
}

/// Hermitian eigendecomposition with the relative clamp applied. Shared by
/// hermitian_inv_sqrt and the reverse-network update.
struct HermEig {
    rvec values;  // clamped, ascending (Eigen order)
    cmat vectors;
};

inline HermEig hermitian_eig_clamped(const cmat& m) {
    Eigen::SelfAdjointEigenSolver<cmat> es(0.5 * (m + m.adjoint()));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("hermitian_eig: eigensolver failed to converge");
    HermEig out{es.eigenvalues(), es.eigenvectors()};
    const double lam_max = out.values.maxCoeff();
    if (lam_max <= 0.0)
        throw std::invalid_argument("hermitian_eig: matrix is not positive definite");
    const double floor = kEigClampRel * lam_max;
    for (Eigen::Index i = 0; i < out.values.size(); ++i)
        out.values(i) = std::max(out.values(i), floor);
    return out;
}

/// Inverse principal square root of a Hermitian positive-definite matrix:
/// returns R with R * M * R = I. Eigenvalues below the relative clamp floor
/// are lifted rather than rejected.
inline cmat hermitian_inv_sqrt(const cmat& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("hermitian_inv_sqrt: matrix must be square");
    if (!all_finite(m))
        throw std::invalid_argument("hermitian_inv_sqrt: input has non-finite entries");
    if (hermitian_deviation(m) > 1e-9 * std::max(1.0, m.norm()))
        throw std::invalid_argument("hermitian_inv_sqrt: matrix is not Hermitian");

    const HermEig eig = hermitian_eig_clamped(m);
    cmat r = eig.vectors * eig.values.cwiseSqrt().cwiseInverse().asDiagonal() *
             eig.vectors.adjoint();
    return 0.5 * (r + r.adjoint());
}

struct WaterfillResult {
    rvec powers;        // one per gain, >= 0
    double water_level = 0.0;
    int active_count = 0;
};

/// Water-filling: maximize sum log2(1 + gains[n] * p[n]) subject to
/// sum p <= budget, p >= 0. Sorts gains descending and walks candidate
/// active prefixes from the largest down; the first prefix whose smallest
/// power is positive is the optimum. Exact in exact arithmetic, O(n log n).
inline WaterfillResult water_fill(const rvec& gains, double budget) {
    if (!(budget > 0.0)) throw std::invalid_argument("water_fill: budget must be positive");
    const Eigen::Index n = gains.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(gains(i)))
            throw std::invalid_argument("water_fill: non-finite gain");
        if (gains(i) < 0.0)
            throw std::invalid_argument("water_fill: negative gain");
    }

    WaterfillResult out;
    out.powers = rvec::Zero(n);
    if (n == 0) return out;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return gains(a) > gains(b); });

    Eigen::Index positive = 0;
    while (positive < n && gains(order[static_cast<std::size_t>(positive)]) > 0.0) ++positive;
    if (positive == 0) return out;  // all gains zero: nothing to allocate

    for (Eigen::Index m = positive; m >= 1; --m) {
        double inv_sum = 0.0;
        for (Eigen::Index i = 0; i < m; ++i)
            inv_sum += 1.0 / gains(order[static_cast<std::size_t>(i)]);
        const double level = (budget + inv_sum) / static_cast<double>(m);
        const double p_last = level - 1.0 / gains(order[static_cast<std::size_t>(m - 1)]);
        if (p_last > 0.0) {
            for (Eigen::Index i = 0; i < m; ++i) {
                const Eigen::Index idx = order[static_cast<std::size_t>(i)];
                out.powers(idx) = level - 1.0 / gains(idx);
            }
            out.water_level = level;
            out.active_count = static_cast<int>(m);
            return out;
        }
    }
    return out;  // unreachable for positive budget, but keeps the compiler honest
}

}  // namespace reprec
