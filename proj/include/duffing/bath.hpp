// bath.hpp: Ohmic bath and the filtered Redfield coupling operators
//
// In the rotating frame the coupling -x X_E becomes -x_zpf (a^dag e^{i nu t} + a e^{-i nu t}) X_E.
// Second order with the Markov approximation gives
//
//   D_t(rho) = -1/(4 aleph) { [a^dag, A rho] + [a, B rho]
//                             + e^{+2i nu t} [a^dag, B rho] + e^{-2i nu t} [a, A rho] + h.c. }
//
// with A = C(-L + nu) a and B = C(-L - nu) a^dag, where L X = [H~_S, X] is applied
// elementwise in the H~_S eigenbasis: (C(-L + w) X)_mn = C(w - (E_m - E_n)) X_mn.

#pragma once

#include "duffing/fock.hpp"
#include "duffing/params.hpp"
#include "duffing/spectra.hpp"

#include <cmath>
#include <complex>
#include <limits>

namespace duffing {

// Ohmic spectral density, odd in omega. Normalised so that J(Omega) = m kappa Omega,
// i.e. kappa is the damping rate at the oscillator frequency for every cutoff.
inline double spectral_density(double omega, const SystemParams& p) {
    if (omega == 0.0) return 0.0;
    const double w = std::abs(omega);
    const double mag = p.aleph * p.kappa * w * std::exp(-(w - 1.0) / p.omega_cutoff);
    return omega > 0.0 ? mag : -mag;
}

// C(omega) = 2 [1 + n(omega)] J(omega) = 2 J(omega) / (1 - exp(-beta omega)).
inline double correlation_spectrum(double omega, const SystemParams& p) {
    const double beta = p.beta_omega;
    if (std::isinf(beta)) return omega > 0.0 ? 2.0 * spectral_density(omega, p) : 0.0;
    const double x = beta * omega;
    const double slope = p.aleph * p.kappa * std::exp(1.0 / p.omega_cutoff);  // J'(0)
    if (std::abs(x) < 1e-8) {
        // 2 J'(0) omega / (beta omega - (beta omega)^2/2) expanded about omega = 0
        return 2.0 * slope / beta * (1.0 + 0.5 * x);
    }
    const double denom = -std::expm1(-x);
    if (std::isinf(denom)) return 0.0;
    return 2.0 * spectral_density(omega, p) / denom;
}

struct DissipatorSet {
    FockOperator a_minus;      // C(-L + nu) a
    FockOperator adag_plus;    // C(-L - nu) a^dag
    FockOperator adag_minus;   // C(-L - nu) a^dag, multiplies e^{+2i nu t}
    FockOperator a_plus;       // C(-L + nu) a, multiplies e^{-2i nu t}
    double nu{};
    double prefactor{};        // 1/(4 aleph)
    bool include_counter_rotating{true};

    int dim() const { return a_minus.dim(); }
};

inline Matrix filter_in_eigenbasis(const RotatingFrameSystem& sys, const Matrix& op, double shift,
                                   const SystemParams& p) {
    Matrix eig = sys.to_eigenbasis(op);
    const auto& e = sys.eigenvalues;
    for (Eigen::Index n = 0; n < eig.cols(); ++n) {
        for (Eigen::Index m = 0; m < eig.rows(); ++m) {
            eig(m, n) *= correlation_spectrum(shift - (e(m) - e(n)), p);
        }
    }
    return sys.from_eigenbasis(eig);
}

inline DissipatorSet build_dissipator(const RotatingFrameSystem& sys, const SystemParams& p,
                                      bool include_counter_rotating = true) {
    const int dim = sys.dim();
    const FockOperator a = annihilation(dim);
    const double nu = p.drive_frequency();
    DissipatorSet d;
    d.nu = nu;
    d.prefactor = 1.0 / (4.0 * p.aleph);
    d.include_counter_rotating = include_counter_rotating;
    d.a_minus = FockOperator(filter_in_eigenbasis(sys, a.matrix(), nu, p));
    d.adag_plus = FockOperator(filter_in_eigenbasis(sys, a.adjoint().matrix(), -nu, p));
    d.adag_minus = d.adag_plus;
    d.a_plus = d.a_minus;
    return d;
}

struct LindbladChannels {
    double rate_down{};   // kappa [1 + n(Omega)]
    double rate_up{};     // kappa n(Omega)
    FockOperator a;
    FockOperator adag;
};

inline LindbladChannels lindblad_dissipator(const SystemParams& p, int dim) {
    const double n = bose_occupation(1.0, p.beta_omega);
    LindbladChannels l;
    l.rate_down = p.kappa * (1.0 + n);
    l.rate_up = p.kappa * n;
    l.a = annihilation(dim);
    l.adag = l.a.adjoint();
    return l;
}

inline LindbladChannels lindblad_dissipator(const SystemParams& p) { return lindblad_dissipator(p, p.n_trunc); }

// ---------------------------------------------------------------------------
// Dissipator actions. The ladder products exploit that a and a^dag are bidiagonal.

namespace ladder {

// out = a X : row n gets sqrt(n+1) X(n+1, :)
inline void a_left(const Matrix& x, Matrix& out) {
    const Eigen::Index d = x.rows();
    for (Eigen::Index n = 0; n + 1 < d; ++n) out.row(n) = std::sqrt(double(n + 1)) * x.row(n + 1);
    out.row(d - 1).setZero();
}

// out = a^dag X : row n gets sqrt(n) X(n-1, :)
inline void adag_left(const Matrix& x, Matrix& out) {
    const Eigen::Index d = x.rows();
    out.row(0).setZero();
    for (Eigen::Index n = 1; n < d; ++n) out.row(n) = std::sqrt(double(n)) * x.row(n - 1);
}

// out = X a : column m gets sqrt(m) X(:, m-1)
inline void a_right(const Matrix& x, Matrix& out) {
    const Eigen::Index d = x.cols();
    out.col(0).setZero();
    for (Eigen::Index m = 1; m < d; ++m) out.col(m) = std::sqrt(double(m)) * x.col(m - 1);
}

// out = X a^dag : column m gets sqrt(m+1) X(:, m+1)
inline void adag_right(const Matrix& x, Matrix& out) {
    const Eigen::Index d = x.cols();
    for (Eigen::Index m = 0; m + 1 < d; ++m) out.col(m) = std::sqrt(double(m + 1)) * x.col(m + 1);
    out.col(d - 1).setZero();
}

} // namespace ladder

// Reusable buffers for the dissipator actions.
struct DissipatorWorkspace {
    Matrix m1, p1, p2, t, tmp;

    void resize(Eigen::Index d) {
        for (Matrix* m : {&m1, &p1, &p2, &t, &tmp}) {
            if (m->rows() != d) m->resize(d, d);
        }
    }
};

// out += D_t(rho) for the Redfield set.
inline void accumulate_dissipator(const DissipatorSet& d, const Matrix& rho, double t, DissipatorWorkspace& w,
                                  Matrix& out) {
    w.resize(rho.rows());
    cplx phase_minus{1.0, 0.0};
    if (d.include_counter_rotating) {
        // The a-channel operator B + e^{-2i nu t} A equals e^{-2i nu t}(A + e^{2i nu t} B),
        // so a single dense product serves both commutators.
        const cplx phase_plus = std::polar(1.0, 2.0 * d.nu * t);
        phase_minus = std::conj(phase_plus);
        w.m1 = d.a_minus.matrix() + phase_plus * d.adag_minus.matrix();
        w.p1.noalias() = w.m1 * rho;
    } else {
        w.p1.noalias() = d.a_minus.matrix() * rho;
        w.p2.noalias() = d.adag_plus.matrix() * rho;
    }
    const Matrix& p2 = d.include_counter_rotating ? w.p1 : w.p2;
    // T = [a^dag, P1] + phase [a, P2]
    ladder::adag_left(w.p1, w.t);
    ladder::adag_right(w.p1, w.tmp);
    w.t -= w.tmp;
    ladder::a_left(p2, w.tmp);
    w.t += phase_minus * w.tmp;
    ladder::a_right(p2, w.tmp);
    w.t -= phase_minus * w.tmp;
    out -= d.prefactor * (w.t + w.t.adjoint());
}

// out += kappa_down D[a] rho + kappa_up D[a^dag] rho
inline void accumulate_dissipator(const LindbladChannels& l, const Matrix& rho, DissipatorWorkspace& w,
                                  Matrix& out) {
    w.resize(rho.rows());
    const Eigen::Index d = rho.rows();
    // a rho a^dag
    ladder::a_left(rho, w.tmp);
    ladder::adag_right(w.tmp, w.t);
    out += l.rate_down * w.t;
    // a^dag rho a
    ladder::adag_left(rho, w.tmp);
    ladder::a_right(w.tmp, w.t);
    out += l.rate_up * w.t;
    // -1/2 {a^dag a, rho} and -1/2 {a a^dag, rho}; both number-diagonal (a a^dag truncated at the top).
    for (Eigen::Index c = 0; c < d; ++c) {
        const double nc = static_cast<double>(c);
        const double mc = c + 1 < d ? nc + 1.0 : 0.0;
        for (Eigen::Index r = 0; r < d; ++r) {
            const double nr = static_cast<double>(r);
            const double mr = r + 1 < d ? nr + 1.0 : 0.0;
            out(r, c) -= 0.5 * (l.rate_down * (nr + nc) + l.rate_up * (mr + mc)) * rho(r, c);
        }
    }
}

inline Matrix apply_dissipator(const DissipatorSet& d, const Matrix& rho, double t) {
    DissipatorWorkspace w;
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    accumulate_dissipator(d, rho, t, w, out);
    return out;
}

inline Matrix apply_dissipator(const LindbladChannels& l, const Matrix& rho) {
    DissipatorWorkspace w;
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    accumulate_dissipator(l, rho, w, out);
    return out;
}

} // namespace duffing
