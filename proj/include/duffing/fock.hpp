// fock.hpp: Operators and states in the truncated Fock basis

#pragma once

#include "duffing/errors.hpp"
#include "duffing/params.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace duffing {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kHermiticityTol = 1e-10;
inline constexpr double kTraceTol = 1e-8;
inline constexpr double kPositivityTol = 1e-6;
inline constexpr double kWatchdogTol = 1e-5;

// Dense complex operator on the first dim() Fock states.
class FockOperator {
public:
    FockOperator() = default;

    explicit FockOperator(Matrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols()) {
            throw std::invalid_argument("FockOperator: matrix must be square");
        }
    }

    static FockOperator zero(int dim) { return FockOperator(Matrix::Zero(dim, dim)); }
    static FockOperator identity(int dim) { return FockOperator(Matrix::Identity(dim, dim)); }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    cplx operator()(int r, int c) const { return m_(r, c); }

    FockOperator adjoint() const { return FockOperator(m_.adjoint()); }
    cplx trace() const { return m_.trace(); }

    // Largest elementwise |A - A^dagger|.
    double hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

    friend FockOperator operator+(const FockOperator& a, const FockOperator& b) {
        check_same(a, b);
        return FockOperator(a.m_ + b.m_);
    }
    friend FockOperator operator-(const FockOperator& a, const FockOperator& b) {
        check_same(a, b);
        return FockOperator(a.m_ - b.m_);
    }
    friend FockOperator operator*(const FockOperator& a, const FockOperator& b) {
        check_same(a, b);
        return FockOperator(a.m_ * b.m_);
    }
    friend FockOperator operator*(cplx s, const FockOperator& a) { return FockOperator(s * a.m_); }
    friend FockOperator operator*(double s, const FockOperator& a) { return FockOperator(s * a.m_); }

private:
    static void check_same(const FockOperator& a, const FockOperator& b) {
        if (a.dim() != b.dim()) {
            throw std::invalid_argument("FockOperator: dimension mismatch (" + std::to_string(a.dim()) +
                                        " vs " + std::to_string(b.dim()) + ")");
        }
    }

    Matrix m_;
};

inline FockOperator commutator(const FockOperator& a, const FockOperator& b) { return a * b - b * a; }

struct DensityDiagnostics {
    double hermiticity{};     // max |rho - rho^dagger|
    double trace_error{};     // |Tr rho - 1|
    double min_eigenvalue{};
};

inline DensityDiagnostics inspect_density(const Matrix& rho) {
    DensityDiagnostics d;
    d.hermiticity = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    d.trace_error = std::abs(rho.trace() - cplx(1.0, 0.0));
    const Matrix herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    return d;
}

// Hermitian, unit-trace, (softly) positive operator.
class DensityMatrix {
public:
    explicit DensityMatrix(FockOperator op) : op_(std::move(op)) {
        const auto d = inspect_density(op_.matrix());
        if (d.hermiticity > kHermiticityTol) {
            throw std::invalid_argument("DensityMatrix: not Hermitian (max asymmetry " +
                                        std::to_string(d.hermiticity) + ")");
        }
        if (d.trace_error > kTraceTol) {
            throw std::invalid_argument("DensityMatrix: trace deviates from 1 by " +
                                        std::to_string(d.trace_error));
        }
        if (d.min_eigenvalue < -kPositivityTol) {
            throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                        std::to_string(d.min_eigenvalue));
        }
    }

    static DensityMatrix pure(const Vector& psi) {
        const double norm = psi.norm();
        if (norm == 0.0) throw std::invalid_argument("DensityMatrix::pure: zero vector");
        const Vector v = psi / norm;
        return DensityMatrix(FockOperator(v * v.adjoint()));
    }

    int dim() const { return op_.dim(); }
    const FockOperator& op() const { return op_; }
    const Matrix& matrix() const { return op_.matrix(); }

    double purity() const { return (op_.matrix() * op_.matrix()).trace().real(); }

    // Tr[A rho]
    cplx expectation(const FockOperator& a) const {
        if (a.dim() != dim()) throw std::invalid_argument("expectation: dimension mismatch");
        return (a.matrix() * op_.matrix()).trace();
    }

    // Tr[other rho]; equals <psi|rho|psi> when other = |psi><psi|.
    double overlap(const DensityMatrix& other) const {
        return (other.matrix() * op_.matrix()).trace().real();
    }

private:
    FockOperator op_;
};

// ---------------------------------------------------------------------------
// Ladder and quadrature operators

inline FockOperator annihilation(int dim) {
    if (dim < 2) throw std::invalid_argument("annihilation: dim must be >= 2");
    Matrix a = Matrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return FockOperator(std::move(a));
}

inline FockOperator creation(int dim) { return annihilation(dim).adjoint(); }

inline FockOperator number(int dim) {
    if (dim < 1) throw std::invalid_argument("number: dim must be >= 1");
    Matrix n = Matrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
    return FockOperator(std::move(n));
}

// x = x_zpf (a + a^dagger), x_zpf = sqrt(1/(2 aleph)).
inline FockOperator position(int dim, const SystemParams& p) {
    const FockOperator a = annihilation(dim);
    return p.x_zpf() * (a + a.adjoint());
}

// p = i m Omega x_zpf (a^dagger - a) = i sqrt(aleph/2) (a^dagger - a).
inline FockOperator momentum(int dim, const SystemParams& p) {
    const FockOperator a = annihilation(dim);
    return cplx(0.0, std::sqrt(p.aleph / 2.0)) * (a.adjoint() - a);
}

// ---------------------------------------------------------------------------
// States

inline Vector fock_vector(int n, int dim) {
    if (n < 0 || n >= dim) throw std::invalid_argument("fock_vector: index out of range");
    Vector v = Vector::Zero(dim);
    v(n) = 1.0;
    return v;
}

inline DensityMatrix fock_state(int n, int dim) { return DensityMatrix::pure(fock_vector(n, dim)); }

// Truncated and renormalised Fock amplitudes of |alpha>.
inline Vector coherent_vector(cplx alpha, int dim) {
    if (dim < 2) throw std::invalid_argument("coherent_state: dim must be >= 2");
    const double mean = std::norm(alpha);
    if (mean >= dim / 4.0) {
        throw std::invalid_argument("coherent_state: |alpha|^2 = " + std::to_string(mean) +
                                    " must be below dim/4");
    }
    Vector v = Vector::Zero(dim);
    if (mean == 0.0) {
        v(0) = 1.0;
        return v;
    }
    const double log_abs = std::log(std::abs(alpha));
    const double phase = std::arg(alpha);
    for (int n = 0; n < dim; ++n) {
        const double log_mag = -0.5 * mean + n * log_abs - 0.5 * std::lgamma(n + 1.0);
        v(n) = std::polar(std::exp(log_mag), n * phase);
    }
    const double norm2 = v.squaredNorm();
    if (1.0 - norm2 > 1e-6) {
        throw TruncationOverflow("coherent_state: truncation drops " + std::to_string(1.0 - norm2) +
                                 " of the norm");
    }
    return v / std::sqrt(norm2);
}

inline DensityMatrix coherent_state(cplx alpha, int dim) {
    return DensityMatrix::pure(coherent_vector(alpha, dim));
}

// Population in the two highest Fock levels; the truncation watchdog input.
inline double top_occupation(const Matrix& rho) {
    const auto d = rho.rows();
    if (d < 2) return std::abs(rho(0, 0).real());
    return rho(d - 1, d - 1).real() + rho(d - 2, d - 2).real();
}

inline void check_truncation(const Matrix& rho, double t_periods) {
    const double top = top_occupation(rho);
    if (top > kWatchdogTol) {
        throw TruncationOverflow("top-two Fock levels hold " + std::to_string(top) + " at t = " +
                                 std::to_string(t_periods) + " periods; increase n_trunc");
    }
}

} // namespace duffing
