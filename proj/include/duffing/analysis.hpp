// analysis.hpp: Tunneling-rate extraction and scaling of the escape action

#pragma once

#include "duffing/classical.hpp"
#include "duffing/errors.hpp"
#include "duffing/parallel.hpp"
#include "duffing/params.hpp"
#include "duffing/propagate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace duffing {

inline constexpr double kRateAcceptR2 = 0.99;

struct WindowPolicy {
    double t_transient{20.0};      // drive periods skipped before fitting
    double fall_fraction{0.5};     // fit until P_S < fall_fraction * P_S(t_transient)
    double resolve_fraction{0.9};  // P_S must fall below this fraction or the rate is unresolved
};

struct LineFit {
    double intercept{}, slope{};
    double intercept_stderr{}, slope_stderr{};
    double r_squared{};
    std::vector<double> residuals;
};

// Ordinary least squares y = intercept + slope * x.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("fit_line: need at least two paired samples");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: abscissae are all equal");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    f.residuals.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        f.residuals[i] = y[i] - (f.intercept + f.slope * x[i]);
        rss += f.residuals[i] * f.residuals[i];
    }
    f.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
    if (n > 2) {
        const double s2 = rss / (n - 2);
        f.slope_stderr = std::sqrt(s2 / sxx);
        f.intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    }
    return f;
}

struct RateFitResult {
    double gamma_t{};              // per drive period
    double t_start{}, t_end{};     // fit window, drive periods
    double r_squared{};
    double log_p0{};
    std::size_t samples{};
    bool accepted{};               // r_squared > 0.99
    std::vector<double> times;     // the series that was fitted
    std::vector<double> p_s;
};

// Fits ln P_S(t) = ln P0 - gamma_t t on the early-escape window.
inline RateFitResult tunneling_rate(const std::vector<double>& times, const std::vector<double>& p_s,
                                    const WindowPolicy& policy = {}) {
    if (times.size() != p_s.size() || times.size() < 3) {
        throw std::invalid_argument("tunneling_rate: need at least three paired samples");
    }
    const auto first = std::lower_bound(times.begin(), times.end(), policy.t_transient - 1e-9);
    if (first == times.end()) throw InsufficientDecay("tunneling_rate: series ends before the transient");
    const std::size_t i0 = static_cast<std::size_t>(first - times.begin());
    const double p_ref = p_s[i0];
    if (!(p_ref > 0.0)) throw InsufficientDecay("tunneling_rate: P_S vanished during the transient");

    double p_min = p_ref;
    std::size_t i1 = times.size() - 1;
    bool fell = false;
    for (std::size_t i = i0; i < times.size(); ++i) {
        p_min = std::min(p_min, p_s[i]);
        if (!fell && p_s[i] < policy.fall_fraction * p_ref) {
            i1 = i;
            fell = true;
        }
    }
    if (p_min >= policy.resolve_fraction * p_ref) {
        throw InsufficientDecay("P_S only fell to " + std::to_string(p_min / p_ref) +
                                " of its post-transient value; extend t_final");
    }
    if (i1 < i0 + 2) throw InsufficientDecay("tunneling_rate: fewer than three samples in the fit window");

    RateFitResult r;
    std::vector<double> logs;
    for (std::size_t i = i0; i <= i1; ++i) {
        if (!(p_s[i] > 0.0)) throw InsufficientDecay("tunneling_rate: non-positive P_S inside the fit window");
        r.times.push_back(times[i]);
        r.p_s.push_back(p_s[i]);
        logs.push_back(std::log(p_s[i]));
    }
    const LineFit f = fit_line(r.times, logs);
    r.gamma_t = -f.slope;
    r.log_p0 = f.intercept;
    r.r_squared = f.r_squared;
    r.t_start = r.times.front();
    r.t_end = r.times.back();
    r.samples = r.times.size();
    r.accepted = r.r_squared > kRateAcceptR2;
    return r;
}

inline RateFitResult tunneling_rate(const EvolutionRecord& rec, const WindowPolicy& policy = {}) {
    return tunneling_rate(rec.times, rec.p_s, policy);
}

// ---------------------------------------------------------------------------
// Scaling of ln Gamma_t with eta = (F_B~/F_c)^2 - (F0/F_c)^2

inline double drive_distance(double shifted_ratio, double drive_ratio) {
    if (!(drive_ratio < shifted_ratio)) {
        throw std::invalid_argument("drive F0/F_c = " + std::to_string(drive_ratio) +
                                    " is not below the shifted bifurcation point " + std::to_string(shifted_ratio));
    }
    return shifted_ratio * shifted_ratio - drive_ratio * drive_ratio;
}

// Exact one-sided Wald-Wolfowitz p-value P(R <= runs) for the residual signs in order.
// Few runs means residuals cluster by sign, i.e. systematic curvature.
inline double runs_test_pvalue(const std::vector<double>& residuals) {
    int n1 = 0, n2 = 0, runs = 0;
    int prev = 0;
    for (double r : residuals) {
        const int s = r > 0.0 ? 1 : (r < 0.0 ? -1 : 0);
        if (s == 0) continue;
        (s > 0 ? n1 : n2)++;
        if (s != prev) ++runs;
        prev = s;
    }
    if (n1 == 0 || n2 == 0) return 1.0;
    auto lchoose = [](int n, int k) {
        if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
        return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    };
    const double total = lchoose(n1 + n2, n1);
    auto prob = [&](int r) {
        if (r % 2 == 0) {
            const int k = r / 2;
            return 2.0 * std::exp(lchoose(n1 - 1, k - 1) + lchoose(n2 - 1, k - 1) - total);
        }
        const int k = (r - 1) / 2;
        return std::exp(lchoose(n1 - 1, k) + lchoose(n2 - 1, k - 1) - total) +
               std::exp(lchoose(n1 - 1, k - 1) + lchoose(n2 - 1, k) - total);
    };
    double p = 0.0;
    for (int r = 2; r <= runs; ++r) p += prob(r);
    return std::min(1.0, p);
}

struct PowerFit {
    double c0{}, c1{}, alpha{};
    double c0_stderr{}, c1_stderr{}, alpha_stderr{};
    double rss{};
    bool converged{};
};

namespace detail {

// For fixed alpha the model is linear in (c0, c1); returns the residual sum of squares.
inline double profile_rss(const std::vector<double>& eta, const std::vector<double>& y, double alpha, double& c0,
                          double& c1) {
    std::vector<double> xa(eta.size());
    for (std::size_t i = 0; i < eta.size(); ++i) xa[i] = std::pow(eta[i], alpha);
    const LineFit f = fit_line(xa, y);
    c0 = f.intercept;
    c1 = -f.slope;
    double rss = 0.0;
    for (double r : f.residuals) rss += r * r;
    return rss;
}

} // namespace detail

// Nonlinear least squares y = c0 - c1 eta^alpha: golden-section search over alpha on the
// profiled residual, then Gauss-Newton on all three parameters for the covariance.
inline PowerFit fit_power_law(const std::vector<double>& eta, const std::vector<double>& y, double alpha_lo = 0.05,
                              double alpha_hi = 5.0) {
    const std::size_t n = eta.size();
    if (n != y.size() || n < 4) throw std::invalid_argument("fit_power_law: need at least four paired samples");
    for (double e : eta) {
        if (!(e > 0.0)) throw std::invalid_argument("fit_power_law: eta must be positive");
    }
    double c0 = 0.0, c1 = 0.0;
    // coarse scan guards against a multimodal profile, golden section refines
    const int scan = 200;
    double best_a = alpha_lo, best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= scan; ++i) {
        const double a = alpha_lo * std::pow(alpha_hi / alpha_lo, static_cast<double>(i) / scan);
        const double v = detail::profile_rss(eta, y, a, c0, c1);
        if (v < best) {
            best = v;
            best_a = a;
        }
    }
    const double step = std::pow(alpha_hi / alpha_lo, 1.0 / scan);
    double lo = std::max(alpha_lo, best_a / step), hi = std::min(alpha_hi, best_a * step);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a1 = hi - g * (hi - lo), a2 = lo + g * (hi - lo);
    double f1 = detail::profile_rss(eta, y, a1, c0, c1), f2 = detail::profile_rss(eta, y, a2, c0, c1);
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
        if (f1 < f2) {
            hi = a2;
            a2 = a1;
            f2 = f1;
            a1 = hi - g * (hi - lo);
            f1 = detail::profile_rss(eta, y, a1, c0, c1);
        } else {
            lo = a1;
            a1 = a2;
            f1 = f2;
            a2 = lo + g * (hi - lo);
            f2 = detail::profile_rss(eta, y, a2, c0, c1);
        }
    }
    PowerFit fit;
    fit.alpha = 0.5 * (lo + hi);
    fit.rss = detail::profile_rss(eta, y, fit.alpha, fit.c0, fit.c1);

    Eigen::MatrixXd J(n, 3);
    Eigen::VectorXd r(n);
    auto linearize = [&] {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ea = std::pow(eta[i], fit.alpha);
            r(i) = y[i] - (fit.c0 - fit.c1 * ea);
            J(i, 0) = 1.0;
            J(i, 1) = -ea;
            J(i, 2) = -fit.c1 * ea * std::log(eta[i]);
            rss += r(i) * r(i);
        }
        return rss;
    };
    fit.rss = linearize();
    fit.converged = false;
    for (int it = 0; it < 50; ++it) {
        const Eigen::Vector3d d = J.colPivHouseholderQr().solve(r);
        const PowerFit saved = fit;
        fit.c0 += d(0);
        fit.c1 += d(1);
        fit.alpha += d(2);
        const double rss = linearize();
        if (!(rss <= saved.rss * (1.0 + 1e-12))) {
            fit = saved;
            linearize();
            fit.converged = true;   // no further descent from the profiled optimum
            break;
        }
        fit.rss = rss;
        if (d.cwiseAbs().maxCoeff() < 1e-12 * (1.0 + std::abs(fit.alpha))) {
            fit.converged = true;
            break;
        }
    }
    if (n > 3) {
        const double s2 = fit.rss / (n - 3);
        const Eigen::Matrix3d cov = s2 * (J.transpose() * J).inverse();
        fit.c0_stderr = std::sqrt(std::max(0.0, cov(0, 0)));
        fit.c1_stderr = std::sqrt(std::max(0.0, cov(1, 1)));
        fit.alpha_stderr = std::sqrt(std::max(0.0, cov(2, 2)));
    }
    return fit;
}

struct ScalingFitResult {
    double shifted_ratio{};
    std::vector<double> drive_ratios;
    std::vector<double> etas;
    std::vector<double> log_rates;
    std::vector<RateFitResult> rates;
    // stage 1: ln Gamma = c0 - c1 eta
    double linear_c0{}, linear_c1{}, linear_c1_stderr{}, linear_r_squared{};
    std::vector<double> linear_residuals;   // ordered by increasing eta
    double runs_pvalue{};
    // stage 2: ln Gamma = c0 - c1 eta^alpha
    double alpha{}, alpha_stderr{}, c0{}, c1{};
    bool converged{};
};

// Both fit stages on given (eta, ln Gamma) data.
inline ScalingFitResult fit_scaling(std::vector<double> etas, std::vector<double> log_rates) {
    if (etas.size() != log_rates.size()) throw std::invalid_argument("fit_scaling: size mismatch");
    std::vector<std::size_t> order(etas.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return etas[a] < etas[b]; });
    std::vector<double> e, y;
    for (auto i : order) {
        e.push_back(etas[i]);
        y.push_back(log_rates[i]);
    }
    ScalingFitResult s;
    s.etas = etas;
    s.log_rates = log_rates;
    const LineFit lin = fit_line(e, y);
    s.linear_c0 = lin.intercept;
    s.linear_c1 = -lin.slope;
    s.linear_c1_stderr = lin.slope_stderr;
    s.linear_r_squared = lin.r_squared;
    s.linear_residuals = lin.residuals;
    s.runs_pvalue = runs_test_pvalue(lin.residuals);
    const PowerFit pw = fit_power_law(e, y);
    s.alpha = pw.alpha;
    s.alpha_stderr = pw.alpha_stderr;
    s.c0 = pw.c0;
    s.c1 = pw.c1;
    s.converged = pw.converged;
    return s;
}

// Full pipeline: evolve from the SAS at each drive, extract Gamma_t, fit both stages.
inline ScalingFitResult scaling_fit(const SystemParams& p, const std::vector<double>& drive_grid,
                                    const DynamicsOptions& opt = {}, const WindowPolicy& policy = {},
                                    int record_stride = 200) {
    const double shifted = classical::quantum_shifted_bifurcation(p);
    std::vector<double> etas;
    for (double d : drive_grid) etas.push_back(drive_distance(shifted, d));

    Schedule schedule;
    schedule.record_stride = record_stride;
    auto rates = parallel_map(drive_grid.size(), opt.threads, [&](std::size_t i) {
        const Run run = run_from_attractor(p, drive_grid[i], Attractor::sas, opt, schedule);
        return tunneling_rate(run.record, policy);
    });
    std::vector<double> logs;
    for (const auto& r : rates) {
        if (!(r.gamma_t > 0.0)) {
            throw InsufficientDecay("non-positive tunneling rate " + std::to_string(r.gamma_t));
        }
        logs.push_back(std::log(r.gamma_t));
    }
    ScalingFitResult s = fit_scaling(etas, logs);
    s.shifted_ratio = shifted;
    s.drive_ratios = drive_grid;
    s.rates = std::move(rates);
    return s;
}

// ---------------------------------------------------------------------------
// Hysteresis summary of a two-initialisation sweep

struct HysteresisSummary {
    double jump_ratio{};          // midpoint of the largest consecutive rise of the SAS branch
    double jump_height{};
    bool las_persists{};          // LAS branch stays up at some drive below the jump
    double persist_ratio{};       // lowest such drive
    std::vector<double> upper_x;  // stationary x_bar of the upper / lower roots at Delta~ (NaN if absent)
    std::vector<double> lower_x;
};

// Stationary <x> of a coherent state: 2 x_zpf Re alpha.
inline double coherent_x_bar(cplx alpha, const SystemParams& p) { return 2.0 * p.x_zpf() * alpha.real(); }

inline HysteresisSummary summarize_hysteresis(const SystemParams& p, const std::vector<double>& grid,
                                              const std::vector<double>& x_sas, const std::vector<double>& x_las) {
    if (grid.size() < 2 || x_sas.size() != grid.size() || x_las.size() != grid.size()) {
        throw std::invalid_argument("summarize_hysteresis: need matching series of at least two drives");
    }
    HysteresisSummary h;
    std::size_t best = 0;
    h.jump_height = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double rise = x_sas[i + 1] - x_sas[i];
        if (rise > h.jump_height) {
            h.jump_height = rise;
            best = i;
        }
    }
    h.jump_ratio = 0.5 * (grid[best] + grid[best + 1]);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto a = classical::attractor_coherent_amplitudes(p, grid[i]);
        h.lower_x.push_back(a.sas ? coherent_x_bar(*a.sas, p) : nan);
        h.upper_x.push_back(a.las ? coherent_x_bar(*a.las, p) : nan);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] < h.jump_ratio) || std::isnan(h.lower_x[i]) || std::isnan(h.upper_x[i])) continue;
        if (x_las[i] - x_sas[i] > 0.5 * (h.upper_x[i] - h.lower_x[i])) {
            h.las_persists = true;
            h.persist_ratio = grid[i];
            break;
        }
    }
    return h;
}

} // namespace duffing
