#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace reprec {

using cx = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rvec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Thrown when an iterative routine loses its numerical footing (e.g. the
/// power-constraint bisection cannot bracket a root). Carries the user index
/// and, once known, the outer iteration.
class numerical_failure : public std::runtime_error {
public:
    numerical_failure(std::string what, int user)
        : std::runtime_error(std::move(what)), user_(user) {}

    int user() const noexcept { return user_; }
    int iteration() const noexcept { return iteration_; }
    void set_iteration(int it) noexcept { iteration_ = it; }

private:
    int user_ = -1;
    int iteration_ = -1;
};

/// Zero filter column encountered where a unit-norm direction is required.
class degenerate_stream_error : public std::runtime_error {
public:
    degenerate_stream_error(int user, int stream)
        : std::runtime_error("degenerate stream: zero filter column for user " +
                             std::to_string(user) + ", stream " + std::to_string(stream)),
          user_(user), stream_(stream) {}

    int user() const noexcept { return user_; }
    int stream() const noexcept { return stream_; }

private:
    int user_;
    int stream_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Stable seed derivation for (master seed, snr index, trial index, stream tag).
/// The chain below is part of the reproducibility contract: published numbers
/// can only be reproduced if this mixing never changes.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t tag) {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ (0x9E3779B97F4A7C15ULL * (a + 1)));
    s = splitmix64(s ^ (0xC2B2AE3D27D4EB4FULL * (b + 1)));
    s = splitmix64(s ^ (0x165667B19E3779F9ULL * (tag + 1)));
    return s;
}

/// Deterministic random source. mt19937_64 output is bit-exact across
/// platforms, and the uniform/normal transforms below are written out
/// explicitly so draws never depend on library-specific distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform01() {
        const std::uint64_t x = engine_();
        return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; the spare variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

    /// Standard complex normal: (x + jy)/sqrt(2) with x, y standard normal.
    cx complex_normal() {
        const double x = normal();
        const double y = normal();
        return cx(x, y) / std::sqrt(2.0);
    }

    cvec unit_vector(Eigen::Index n) {
        cvec v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = complex_normal();
        const double nrm = v.norm();
        if (nrm == 0.0) {  // essentially impossible; retry keeps the contract
            return unit_vector(n);
        }
        return v / nrm;
    }

    /// Matrix with i.i.d. standard complex normal entries, drawn row-major.
    cmat complex_gaussian(Eigen::Index rows, Eigen::Index cols) {
        cmat m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = complex_normal();
        return m;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline bool all_finite(const cmat& m) {
    return m.allFinite();
}

/// Normalizes every column to unit Euclidean norm. Zero columns are left
/// untouched; callers decide how to treat them (see degenerate-stream policy).
inline void normalize_columns(cmat& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double nrm = m.col(j).norm();
        if (nrm > 0.0) m.col(j) /= nrm;
    }
}

inline double hermitian_deviation(const cmat& m) {
    return (m - m.adjoint()).norm();
}

}  // namespace reprec
