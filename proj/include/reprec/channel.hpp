#pragma once

#include "reprec/core.hpp"

#include <vector>

namespace reprec {

struct ChannelParams {
    double alpha = 1.0;           // cross-link amplitude scale, in [0, 1]
    double kappa = 0.0;           // Ricean K-factor, >= 0 (0 = Rayleigh)
    double theta_t = kPi / 6.0;   // angle of departure [rad]
    double theta_r = kPi / 6.0;   // angle of arrival [rad]

    void validate() const {
        if (!(alpha >= 0.0 && alpha <= 1.0))
            throw std::invalid_argument("ChannelParams: alpha must be in [0, 1]");
        if (!(kappa >= 0.0))
            throw std::invalid_argument("ChannelParams: kappa must be nonnegative");
        if (!std::isfinite(theta_t) || !std::isfinite(theta_r))
            throw std::invalid_argument("ChannelParams: angles must be finite");
    }
};

/// K x K grid of channel matrices; entry (k, l) is the matrix from Tx l to Rx k
/// with shape n_r[k] x n_t[l].
struct ChannelSet {
    int K = 0;
    std::vector<cmat> matrices;  // row-major K*K

    const cmat& at(int k, int l) const { return matrices[static_cast<std::size_t>(k * K + l)]; }
    cmat& at(int k, int l) { return matrices[static_cast<std::size_t>(k * K + l)]; }
};

/// Uniform linear array response with half-wavelength spacing:
/// entry i (0-based) is exp(-j*pi*i*sin(theta)), so every entry is unit modulus.
inline cvec steering_vector(int n, double theta) {
    if (n < 1) throw std::invalid_argument("steering_vector: antenna count must be >= 1");
    cvec a(n);
    const double s = std::sin(theta);
    for (int i = 0; i < n; ++i) a(i) = std::exp(cx(0.0, -kPi * static_cast<double>(i) * s));
    return a;
}

/// One Ricean draw: sqrt(kappa/(kappa+1)) * a_r a_t^H + sqrt(1/(kappa+1)) * H_sc
/// with H_sc i.i.d. standard complex normal. The steering entries are unit
/// modulus, so E{||H||_F^2} = n_r * n_t holds without any rescaling pass.
inline cmat draw_ricean(int n_r, int n_t, const ChannelParams& params, Rng& rng) {
    if (n_r < 1 || n_t < 1)
        throw std::invalid_argument("draw_ricean: antenna counts must be >= 1");
    params.validate();

    const cmat scattered = rng.complex_gaussian(n_r, n_t);
    if (params.kappa == 0.0) return scattered;

    const cvec ar = steering_vector(n_r, params.theta_r);
    const cvec at = steering_vector(n_t, params.theta_t);
    const double los_w = std::sqrt(params.kappa / (params.kappa + 1.0));
    const double sc_w = std::sqrt(1.0 / (params.kappa + 1.0));
    return los_w * (ar * at.adjoint()) + sc_w * scattered;
}

/// Full K-pair channel set: direct links are plain Ricean draws, cross links
/// are scaled by alpha. Matrices are drawn in row-major (k, l) order so a
/// given seed always produces the same set.
inline ChannelSet draw_channel_set(const std::vector<int>& n_r, const std::vector<int>& n_t,
                                   const ChannelParams& params, Rng& rng) {
    if (n_r.size() != n_t.size() || n_r.empty())
        throw std::invalid_argument("draw_channel_set: inconsistent dimensions");
    const int K = static_cast<int>(n_r.size());

    ChannelSet set;
    set.K = K;
    set.matrices.reserve(static_cast<std::size_t>(K) * static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < K; ++l) {
            cmat h = draw_ricean(n_r[static_cast<std::size_t>(k)],
                                 n_t[static_cast<std::size_t>(l)], params, rng);
            if (k != l) h *= params.alpha;
            set.matrices.push_back(std::move(h));
        }
    }
    return set;
}

}  // namespace reprec
