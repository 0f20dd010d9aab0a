// selftest.hpp: Fast property checks shared by the CLI `selftest` and the test suite

#pragma once

#include "duffing/analysis.hpp"
#include "duffing/bath.hpp"
#include "duffing/classical.hpp"
#include "duffing/fock.hpp"
#include "duffing/params.hpp"
#include "duffing/propagate.hpp"
#include "duffing/spectra.hpp"
#include "duffing/wigner.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace duffing {

namespace oracle {

// Drives where the number of positive stationary roots changes, located by a
// logarithmic scan followed by bisection. Independent of the closed form.
inline std::vector<double> fold_drives(double Delta, double Q, double f_lo = 1e-8, double f_hi = 1.0) {
    auto count = [&](double f) { return classical::stationary_roots(f, Delta, Q).size(); };
    std::vector<double> folds;
    const int scan = 4000;
    double prev_f = f_lo;
    std::size_t prev_n = count(prev_f);
    for (int i = 1; i <= scan; ++i) {
        const double f = f_lo * std::pow(f_hi / f_lo, static_cast<double>(i) / scan);
        const std::size_t n = count(f);
        if (n != prev_n) {
            double a = prev_f, b = f;
            for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
                const double m = 0.5 * (a + b);
                (count(m) == prev_n ? a : b) = m;
            }
            folds.push_back(0.5 * (a + b));
        }
        prev_f = f;
        prev_n = n;
    }
    return folds;
}

} // namespace oracle

struct Check {
    std::string name;
    bool passed{};
    std::string detail;
};

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace detail

inline Check check_shifted_bifurcation(const SystemParams& p = {}) {
    const double r = classical::quantum_shifted_bifurcation(p);
    return {"shifted bifurcation ratio near 0.77", std::abs(r - 0.77) <= 0.01, "ratio = " + detail::fmt(r)};
}

inline Check check_fold_oracle(double Q = 100.0) {
    double worst = 0.0;
    for (double Delta : {-5.0, -10.0, -13.0, -20.0}) {
        const auto cf = classical::critical_forces(Delta, Q);
        const auto folds = oracle::fold_drives(Delta, Q);
        if (folds.size() != 2) return {"closed-form critical forces match fold bisection", false, "fold count != 2"};
        worst = std::max(worst, std::abs(folds[0] - cf.f_Bbar) / cf.f_Bbar);
        worst = std::max(worst, std::abs(folds[1] - cf.f_B) / cf.f_B);
    }
    return {"closed-form critical forces match fold bisection", worst < 1e-4, "max rel err = " + detail::fmt(worst)};
}

// gamma_tilde = 0, F0 = 0: the filtered coupling operators reduce to scaled ladder operators.
inline SystemParams harmonic_params(const SystemParams& base = {}) {
    SystemParams h = base;
    h.gamma_tilde = 0.0;
    h.drive_ratio = 0.0;
    return h;
}

inline Check check_harmonic_dissipator(const SystemParams& base = {}) {
    const SystemParams h = harmonic_params(base);
    const auto sys = rwa_hamiltonian(h, 0.0);
    const auto bmr = build_dissipator(sys, h, false);
    const auto lind = lindblad_dissipator(h, sys.dim());
    const Matrix rho = coherent_state(cplx(1.5, 0.5), sys.dim()).matrix();
    const Matrix d1 = apply_dissipator(bmr, rho, 0.3);
    const Matrix d2 = apply_dissipator(lind, rho);
    const double rel = (d1 - d2).cwiseAbs().maxCoeff() / d2.cwiseAbs().maxCoeff();
    return {"harmonic limit: BMR dissipator equals Lindblad", rel < 1e-6, "max rel diff = " + detail::fmt(rel)};
}

inline Check check_harmonic_decay(const SystemParams& base = {}, double periods = 10.0) {
    SystemParams h = harmonic_params(base);
    h.t_final = periods;
    const auto sys = rwa_hamiltonian(h, 0.0);
    DynamicsOptions opt;
    opt.include_counter_rotating = false;
    Generator gen(sys, h, opt);
    const cplx alpha(2.0, 0.0);
    Schedule s;
    s.record_stride = 200;
    s.snapshot_periods = {periods};
    const auto rec = evolve(coherent_state(alpha, sys.dim()), gen, h, s);
    const double n0 = std::norm(alpha);
    const double t = periods * 2.0 * std::numbers::pi;
    const double n_t = (number(sys.dim()).matrix() * rec.snapshots.back().rho).trace().real();
    const double rel = std::abs(n_t - n0 * std::exp(-h.kappa * t)) / (n0 * std::exp(-h.kappa * t));
    return {"harmonic limit: <n> decays as n0 exp(-kappa t)", rel < 1e-4, "rel err = " + detail::fmt(rel)};
}

inline Check check_trace_annihilation(const SystemParams& p = {}) {
    const auto sys = rwa_hamiltonian(p, p.drive_ratio);
    const auto d = build_dissipator(sys, p, true);
    const Matrix rho = coherent_state(cplx(0.8, -1.1), sys.dim()).matrix();
    double worst = 0.0;
    for (double t : {0.0, 0.7, 2.9}) worst = std::max(worst, std::abs(apply_dissipator(d, rho, t).trace()));
    return {"dissipator is trace-annihilating", worst < 1e-12, "max |Tr D(rho)| = " + detail::fmt(worst)};
}

inline Check check_wigner_vacuum() {
    const auto w = wigner(fock_state(0, 20).matrix(), GridSpec{6.0, 121});
    const double peak = w.values.maxCoeff();
    const bool ok = std::abs(peak - 1.0 / std::numbers::pi) < 1e-6 && std::abs(w.normalization() - 1.0) < 1e-3;
    return {"Wigner: vacuum peak 1/pi, unit normalization", ok,
            "peak*pi = " + detail::fmt(peak * std::numbers::pi) + ", norm = " + detail::fmt(w.normalization())};
}

inline Check check_wigner_fock_one() {
    const double w0 = wigner_point(fock_state(1, 10).matrix(), 0.0, 0.0).real();
    return {"Wigner: |1> is -1/pi at the origin", std::abs(w0 + 1.0 / std::numbers::pi) < 1e-4,
            "W(0,0)*pi = " + detail::fmt(w0 * std::numbers::pi)};
}

inline Check check_rate_fit() {
    std::vector<double> t, ps;
    for (int i = 0; i <= 160; ++i) {
        t.push_back(i);
        ps.push_back(std::exp(-0.01 * i));
    }
    WindowPolicy w;
    const auto r = tunneling_rate(t, ps, w);
    return {"rate fit recovers a synthetic exponential", std::abs(r.gamma_t - 0.01) < 1e-12 && r.r_squared > 0.999999,
            "gamma_t = " + detail::fmt(r.gamma_t)};
}

inline Check check_power_fit() {
    std::vector<double> eta, y;
    for (int i = 0; i < 8; ++i) {
        eta.push_back(0.01 + 0.01 * i);
        y.push_back(5.0 - 300.0 * std::pow(eta.back(), 1.5));
    }
    const auto s = fit_scaling(eta, y);
    return {"power-law fit recovers alpha = 1.5", std::abs(s.alpha - 1.5) < 1e-6, "alpha = " + detail::fmt(s.alpha)};
}

inline Check check_config_rejects_unknown_key() {
    std::istringstream in("aleph = 12\nbogus = 1\n");
    try {
        parse_config(in);
    } catch (const ConfigError&) {
        return {"config: unknown keys are rejected", true, ""};
    }
    return {"config: unknown keys are rejected", false, "no error raised"};
}

inline std::vector<Check> run_selftest(const SystemParams& p = {}) {
    std::vector<std::function<Check()>> checks{
        [&] { return check_shifted_bifurcation(p); },
        [] { return check_fold_oracle(); },
        [&] { return check_harmonic_dissipator(p); },
        [&] { return check_harmonic_decay(p); },
        [&] { return check_trace_annihilation(p); },
        [] { return check_wigner_vacuum(); },
        [] { return check_wigner_fock_one(); },
        [] { return check_rate_fit(); },
        [] { return check_power_fit(); },
        [] { return check_config_rejects_unknown_key(); },
    };
    std::vector<Check> out;
    for (auto& c : checks) {
        try {
            out.push_back(c());
        } catch (const std::exception& e) {
            out.push_back({"(check threw)", false, e.what()});
        }
    }
    return out;
}

} // namespace duffing
