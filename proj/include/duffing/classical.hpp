// classical.hpp: Slow-amplitude analysis of the driven Duffing oscillator
//
// The stationary amplitude x~ of
//     2i dx~/dtau = [(Delta - i)/Q + 3|x~|^2/4] x~ - f
// solves the real cubic r[(Delta/Q + 3r/4)^2 + 1/Q^2] = f^2 in r = |x~|^2.
// With U = 3Qr/4 this becomes U[(Delta + U)^2 + 1] = 3 Q^3 f^2 / 4, which is what
// the root finder works with (U is O(|Delta|) for every drive of interest).

#pragma once

#include "duffing/errors.hpp"
#include "duffing/params.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace duffing::classical {

using cplx = std::complex<double>;

inline const double kCriticalDetuning = -std::sqrt(3.0);   // Delta_c

enum class Branch { lower, middle, upper };

inline const char* to_string(Branch b) {
    switch (b) {
    case Branch::lower: return "lower";
    case Branch::middle: return "middle";
    case Branch::upper: return "upper";
    }
    return "?";
}

struct AmplitudeState {
    cplx x_tilde{};
    double r{};          // |x~|^2
    Branch branch{Branch::lower};
    bool stable{true};
};

struct CriticalForces {
    double f_B{};        // upper critical drive (lower branch folds away)
    double f_Bbar{};     // lower critical drive (upper branch is born)
    double f_c{};        // value of both at Delta = Delta_c
};

// Stationary-cubic residual r[(Delta/Q + 3r/4)^2 + 1/Q^2] - f^2.
inline double stationary_residual(double r, double f, double Delta, double Q) {
    const double s = Delta / Q + 0.75 * r;
    return r * (s * s + 1.0 / (Q * Q)) - f * f;
}

inline bool is_bistable(double Delta) { return Delta / kCriticalDetuning > 1.0; }

// Closed-form critical drives. Exact for the stationary cubic at any Q.
inline CriticalForces critical_forces(double Delta, double Q) {
    if (!(Q > 0.0)) throw std::invalid_argument("critical_forces: Q must be > 0");
    if (!is_bistable(Delta)) {
        throw NoBistability("no bistability: Delta/Delta_c = " + std::to_string(Delta / kCriticalDetuning) +
                            " <= 1");
    }
    const double x = kCriticalDetuning / Delta;
    const double f_c = std::pow(2.0, 2.5) / (std::pow(3.0, 1.25) * std::pow(Q, 1.5));
    const double pre = f_c / (2.0 * std::pow(x, 1.5));
    const double root = std::pow(1.0 - x * x, 1.5);
    CriticalForces out;
    out.f_c = f_c;
    out.f_B = pre * std::sqrt(1.0 + 3.0 * x * x + root);
    out.f_Bbar = pre * std::sqrt(1.0 + 3.0 * x * x - root);
    return out;
}

namespace detail {

// Real roots of U^3 + 2 Delta U^2 + (Delta^2 + 1) U - g = 0, ascending, Newton-polished.
inline std::vector<double> scaled_cubic_roots(double Delta, double g) {
    const double b = 2.0 * Delta;
    const double c = Delta * Delta + 1.0;
    const double d = -g;
    auto poly = [&](double u) { return ((u + b) * u + c) * u + d; };
    auto dpoly = [&](double u) { return (3.0 * u + 2.0 * b) * u + c; };

    const double p = c - b * b / 3.0;
    const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    const double disc = -(4.0 * p * p * p + 27.0 * q * q);
    std::vector<double> roots;
    if (disc > 0.0 && p < 0.0) {
        const double m = 2.0 * std::sqrt(-p / 3.0);
        const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
        const double theta = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k) {
            roots.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) - b / 3.0);
        }
    } else {
        const double s = std::sqrt(std::max(0.0, q * q / 4.0 + p * p * p / 27.0));
        roots.push_back(std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s) - b / 3.0);
    }
    for (double& u : roots) {
        for (int it = 0; it < 50; ++it) {
            const double dp = dpoly(u);
            if (dp == 0.0) break;
            const double step = poly(u) / dp;
            const double next = u - step;
            if (!std::isfinite(next)) break;
            u = next;
            if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(u))) break;
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

} // namespace detail

// Linear stability of a stationary amplitude: dx/dtau = -(i/2)(P dx + S dx*),
// P = (Delta - i)/Q + 3r/2, S = 3 x~^2/4. The trace is -1/Q < 0, so the sign of
// the determinant |c1|^2 - |c2|^2 decides.
inline bool is_stable(cplx x_tilde, double Delta, double Q) {
    const double r = std::norm(x_tilde);
    const cplx P = cplx(Delta, -1.0) / Q + 1.5 * r;
    const cplx S = 0.75 * x_tilde * x_tilde;
    const cplx c1 = cplx(0.0, -0.5) * P;
    const cplx c2 = cplx(0.0, -0.5) * S;
    return std::norm(c1) - std::norm(c2) > 0.0;
}

// Right-hand side dx~/dtau of the slow-amplitude equation.
inline cplx amplitude_rhs(cplx x_tilde, double f, double Delta, double Q) {
    const cplx bracket = cplx(Delta, -1.0) / Q + 0.75 * std::norm(x_tilde);
    return cplx(0.0, -0.5) * (bracket * x_tilde - f);
}

inline std::vector<AmplitudeState> stationary_roots(double f, double Delta, double Q) {
    if (f < 0.0) throw std::invalid_argument("stationary_roots: f must be >= 0");
    if (!(Q > 0.0)) throw std::invalid_argument("stationary_roots: Q must be > 0");
    if (f == 0.0) return {AmplitudeState{cplx{}, 0.0, Branch::lower, true}};

    const double g = 0.75 * Q * Q * Q * f * f;
    std::vector<double> us = detail::scaled_cubic_roots(Delta, g);
    std::vector<AmplitudeState> out;
    for (double u : us) {
        if (u <= 0.0) continue;
        AmplitudeState s;
        s.r = 4.0 * u / (3.0 * Q);
        s.x_tilde = f / (cplx(Delta, -1.0) / Q + 0.75 * s.r);
        s.stable = is_stable(s.x_tilde, Delta, Q);
        out.push_back(s);
    }
    if (out.size() == 3) {
        out[0].branch = Branch::lower;
        out[1].branch = Branch::middle;
        out[2].branch = Branch::upper;
    } else if (out.size() == 1) {
        if (is_bistable(Delta)) {
            out[0].branch = f < critical_forces(Delta, Q).f_Bbar ? Branch::lower : Branch::upper;
        } else {
            // Below the resonance peak 3r/4 = -Delta/Q counts as the lower branch.
            out[0].branch = 0.75 * out[0].r < -Delta / Q ? Branch::lower : Branch::upper;
        }
    } else if (out.size() == 2) {
        // Exactly at a fold: the double root is marginal.
        const auto cf = is_bistable(Delta) ? critical_forces(Delta, Q) : CriticalForces{};
        const bool at_upper_fold = std::abs(f - cf.f_B) < std::abs(f - cf.f_Bbar);
        out[0].branch = at_upper_fold ? Branch::middle : Branch::lower;
        out[1].branch = at_upper_fold ? Branch::upper : Branch::middle;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Conversions between the scaled drive f and the Hamiltonian force F0.

// F0 = force_unit * f, from F = sqrt(m^3 Omega^6 / (16 gamma)) f with m = aleph, gamma = gamma_tilde*aleph.
inline double force_unit(const SystemParams& p) {
    if (!(p.gamma_tilde > 0.0)) throw std::invalid_argument("force_unit: gamma_tilde must be > 0");
    return p.aleph / (4.0 * std::sqrt(p.gamma_tilde));
}

// F_c: the unshifted classical upper critical force, in Hamiltonian units.
inline double drive_unit(const SystemParams& p) {
    return force_unit(p) * critical_forces(p.detuning(), p.quality_factor()).f_B;
}

// Scaled drive f for a drive given as a fraction of F_c.
inline double scaled_drive(const SystemParams& p, double drive_ratio) {
    return drive_ratio * critical_forces(p.detuning(), p.quality_factor()).f_B;
}

// Coherent amplitude for a slow amplitude: x~ = sqrt(8 gamma_tilde/aleph) conj(alpha).
inline cplx alpha_from_amplitude(cplx x_tilde, const SystemParams& p) {
    return std::conj(x_tilde) * std::sqrt(p.aleph / (8.0 * p.gamma_tilde));
}

inline cplx amplitude_from_alpha(cplx alpha, const SystemParams& p) {
    return std::conj(alpha) * std::sqrt(8.0 * p.gamma_tilde / p.aleph);
}

// F_B(Delta~)/F_c.
inline double quantum_shifted_bifurcation(const SystemParams& p) {
    const double Q = p.quality_factor();
    const auto shifted = critical_forces(p.shifted_detuning(), Q);
    const auto plain = critical_forces(p.detuning(), Q);
    return shifted.f_B / plain.f_B;
}

// Mean-field Heisenberg equation for alpha = <a> under the rotating-frame Hamiltonian
// with Lindblad damping at zero temperature; F0 in Hamiltonian units.
inline cplx mean_field_rhs(cplx alpha, const SystemParams& p, double F0) {
    const double two_c = 3.0 * p.gamma_tilde / p.aleph;
    const double detune = p.delta - two_c - two_c * std::norm(alpha);
    return cplx(0.0, -1.0) * (detune * alpha + F0 * p.x_zpf()) - 0.5 * p.kappa * alpha;
}

struct AttractorAmplitudes {
    std::optional<cplx> sas;
    std::optional<cplx> las;
    std::optional<cplx> x_tilde_sas;
    std::optional<cplx> x_tilde_las;
};

// Coherent amplitudes of the stable stationary solutions at the shifted detuning.
inline AttractorAmplitudes attractor_coherent_amplitudes(const SystemParams& p, double drive_ratio) {
    const double f = scaled_drive(p, drive_ratio);
    AttractorAmplitudes out;
    for (const auto& s : stationary_roots(f, p.shifted_detuning(), p.quality_factor())) {
        if (!s.stable) continue;
        if (s.branch == Branch::lower) {
            out.x_tilde_sas = s.x_tilde;
            out.sas = alpha_from_amplitude(s.x_tilde, p);
        } else if (s.branch == Branch::upper) {
            out.x_tilde_las = s.x_tilde;
            out.las = alpha_from_amplitude(s.x_tilde, p);
        }
    }
    return out;
}

// Upper-branch amplitude at the drive where it is born (just above f_Bbar at Delta~).
// Used to seed a large-amplitude state when none exists at the requested drive.
inline cplx las_at_birth(const SystemParams& p) {
    const double Dt = p.shifted_detuning();
    const double Q = p.quality_factor();
    const auto cf = critical_forces(Dt, Q);
    const auto roots = stationary_roots(cf.f_Bbar * (1.0 + 1e-9), Dt, Q);
    return alpha_from_amplitude(roots.back().x_tilde, p);
}

// ---------------------------------------------------------------------------

struct DiagramPoint {
    double drive_ratio{};                       // F0/F_c
    std::vector<AmplitudeState> roots;          // ascending in r
};

struct BifurcationDiagram {
    bool shifted{false};
    double Delta{};
    std::vector<DiagramPoint> points;
    CriticalForces forces;                      // at Delta
    double f_B_ratio{};                         // f_B(Delta)/f_B(Delta_classical)
    double f_Bbar_ratio{};
};

// Stationary amplitudes over a grid of F0/F_c, either at Delta or at Delta~.
inline BifurcationDiagram bifurcation_diagram(const SystemParams& p, const std::vector<double>& drive_ratios,
                                              bool shifted) {
    BifurcationDiagram d;
    d.shifted = shifted;
    d.Delta = shifted ? p.shifted_detuning() : p.detuning();
    const double Q = p.quality_factor();
    d.forces = critical_forces(d.Delta, Q);
    const double unit = critical_forces(p.detuning(), Q).f_B;
    d.f_B_ratio = d.forces.f_B / unit;
    d.f_Bbar_ratio = d.forces.f_Bbar / unit;
    for (double ratio : drive_ratios) {
        d.points.push_back({ratio, stationary_roots(ratio * unit, d.Delta, Q)});
    }
    return d;
}

} // namespace duffing::classical
