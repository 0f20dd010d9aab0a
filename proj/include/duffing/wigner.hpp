// wigner.hpp: Wigner quasi-probability on a phase-space grid
//
// Quadratures are X = (a + a^dag)/sqrt(2) and P = i(a^dag - a)/sqrt(2), so the vacuum is
// exp(-X^2 - P^2)/pi and a coherent state |alpha> peaks at (sqrt(2) Re alpha, sqrt(2) Im alpha).
// Physical position is x = quadrature_scale * X with quadrature_scale = sqrt(2) x_zpf.
//
// For m >= n the kernel of |m><n| at alpha = (X + iP)/sqrt(2) is
//   (1/pi) (-1)^n sqrt(n!/m!) (2 alpha*)^(m-n) exp(-2|alpha|^2) L_n^(m-n)(4|alpha|^2).

#pragma once

#include "duffing/errors.hpp"
#include "duffing/fock.hpp"
#include "duffing/parallel.hpp"
#include "duffing/params.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace duffing {

struct GridSpec {
    double extent{8.0};   // axes span [-extent, extent] in quadrature units
    int points{201};
};

struct WignerGrid {
    std::vector<double> x_axis;
    std::vector<double> p_axis;
    Eigen::MatrixXd values;        // values(i, j) = W(x_axis[i], p_axis[j])
    double cell_area{};
    double max_imag{};             // largest |Im W| before discarding it
    double quadrature_scale{};     // physical x per unit X; zero when not attached to params

    double normalization() const { return values.sum() * cell_area; }
    double min_value() const { return values.minCoeff(); }
    double max_abs() const { return values.cwiseAbs().maxCoeff(); }

    double boundary_max() const {
        const Eigen::Index nx = values.rows(), np = values.cols();
        double b = 0.0;
        b = std::max(b, values.row(0).cwiseAbs().maxCoeff());
        b = std::max(b, values.row(nx - 1).cwiseAbs().maxCoeff());
        b = std::max(b, values.col(0).cwiseAbs().maxCoeff());
        b = std::max(b, values.col(np - 1).cwiseAbs().maxCoeff());
        return b;
    }

    bool same_grid(const WignerGrid& o) const { return x_axis == o.x_axis && p_axis == o.p_axis; }
};

inline std::vector<double> uniform_axis(double extent, int points) {
    if (points < 2 || !(extent > 0.0)) throw std::invalid_argument("uniform_axis: need extent > 0 and points >= 2");
    std::vector<double> a(static_cast<std::size_t>(points));
    const double h = 2.0 * extent / (points - 1);
    for (int i = 0; i < points; ++i) a[i] = -extent + h * i;
    if (points % 2 == 1) a[points / 2] = 0.0;
    return a;
}

// Single-point kernel sum. Works for any square rho; the imaginary part measures non-Hermiticity.
inline cplx wigner_point(const Matrix& rho, double X, double P) {
    const int dim = static_cast<int>(rho.rows());
    const double r2 = 0.5 * (X * X + P * P);   // |alpha|^2
    const double lag_x = 4.0 * r2;
    const double theta = std::atan2(P, X);
    const double log_two_r = r2 > 0.0 ? std::log(2.0 * std::sqrt(r2)) : -INFINITY;

    cplx total{};
    for (int d = 0; d < dim; ++d) {
        if (d > 0 && r2 == 0.0) break;
        // prefactor (2|alpha|)^d sqrt(k!/(k+d)!) exp(-2|alpha|^2), updated in k
        double pref = std::exp(d * (d > 0 ? log_two_r : 0.0) - 0.5 * std::lgamma(d + 1.0) - 2.0 * r2);
        double l_prev = 0.0, l_cur = 1.0;
        cplx s_lower{}, s_upper{};   // sums over rho(k+d, k) and rho(k, k+d)
        for (int k = 0; k + d < dim; ++k) {
            if (k == 1) {
                l_prev = l_cur;
                l_cur = 1.0 + d - lag_x;
            } else if (k > 1) {
                const double l_next = ((2.0 * (k - 1) + 1.0 + d - lag_x) * l_cur - (k - 1.0 + d) * l_prev) / k;
                l_prev = l_cur;
                l_cur = l_next;
            }
            const double w = ((k & 1) ? -pref : pref) * l_cur;
            s_lower += rho(k + d, k) * w;
            if (d > 0) s_upper += rho(k, k + d) * w;
            pref *= std::sqrt((k + 1.0) / (k + d + 1.0));
        }
        if (d == 0) {
            total += s_lower;
        } else {
            const cplx phase = std::polar(1.0, -d * theta);   // (alpha*/|alpha|)^d
            total += phase * s_lower + std::conj(phase) * s_upper;
        }
    }
    return total / std::numbers::pi;
}

// Evaluates W on the grid. Throws GridTooSmall when the boundary still carries weight.
inline WignerGrid wigner(const Matrix& rho, const GridSpec& spec = {}, int threads = 1,
                         bool check_boundary = true) {
    WignerGrid g;
    g.x_axis = uniform_axis(spec.extent, spec.points);
    g.p_axis = g.x_axis;
    const double h = g.x_axis[1] - g.x_axis[0];
    g.cell_area = h * h;
    const std::size_t nx = g.x_axis.size(), np = g.p_axis.size();
    g.values.resize(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(np));

    const auto rows = parallel_map(nx, threads, [&](std::size_t i) {
        std::vector<cplx> row(np);
        for (std::size_t j = 0; j < np; ++j) row[j] = wigner_point(rho, g.x_axis[i], g.p_axis[j]);
        return row;
    });
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < np; ++j) {
            g.values(i, j) = rows[i][j].real();
            g.max_imag = std::max(g.max_imag, std::abs(rows[i][j].imag()));
        }
    }
    if (check_boundary) {
        const double edge = g.boundary_max();
        const double peak = g.max_abs();
        if (edge > 1e-6 * peak) {
            throw GridTooSmall("Wigner grid extent " + std::to_string(spec.extent) + " too small: boundary |W| = " +
                               std::to_string(edge) + " vs max " + std::to_string(peak));
        }
    }
    return g;
}

inline WignerGrid wigner(const DensityMatrix& rho, const SystemParams& p, const GridSpec& spec = {}, int threads = 1) {
    WignerGrid g = wigner(rho.matrix(), spec, threads);
    g.quadrature_scale = std::sqrt(2.0) * p.x_zpf();
    return g;
}

// Phase-space location (X, P) of a coherent amplitude.
inline std::pair<double, double> phase_space_point(cplx alpha) {
    return {std::sqrt(2.0) * alpha.real(), std::sqrt(2.0) * alpha.imag()};
}

// ---------------------------------------------------------------------------

struct AttractorWeights {
    double p_s{};        // least-squares coefficient of W_S
    double p_l{};        // mass of the remainder W - p_s W_S
    double residual{};   // L2 norm of the remainder
};

inline AttractorWeights attractor_decomposition(const WignerGrid& w, const WignerGrid& w_s) {
    if (!w.same_grid(w_s)) throw std::invalid_argument("attractor_decomposition: grids differ");
    const double ss = w_s.values.squaredNorm();
    if (ss == 0.0) throw std::invalid_argument("attractor_decomposition: reference Wigner function vanishes");
    AttractorWeights out;
    out.p_s = w.values.cwiseProduct(w_s.values).sum() / ss;
    const Eigen::MatrixXd rest = w.values - out.p_s * w_s.values;
    out.p_l = rest.sum() * w.cell_area;
    out.residual = std::sqrt(rest.squaredNorm() * w.cell_area);
    return out;
}

struct Lobe {
    double peak_x{}, peak_p{}, peak_value{};
    double centroid_x{}, centroid_p{};   // W-weighted over the half-maximum region
    double fwhm{};                       // diameter of a disc with the half-maximum area
    std::size_t cells{};

    double radius() const { return std::hypot(centroid_x, centroid_p); }
};

// Positive lobes: local maxima above min_fraction of the global maximum whose
// half-maximum regions are disjoint. Sorted by descending peak value.
inline std::vector<Lobe> find_lobes(const WignerGrid& w, double min_fraction = 0.05) {
    const Eigen::Index nx = w.values.rows(), np = w.values.cols();
    const double top = w.values.maxCoeff();
    std::vector<std::pair<Eigen::Index, Eigen::Index>> maxima;
    for (Eigen::Index i = 0; i < nx; ++i) {
        for (Eigen::Index j = 0; j < np; ++j) {
            const double v = w.values(i, j);
            if (v < min_fraction * top) continue;
            bool is_max = true;
            for (int di = -1; di <= 1 && is_max; ++di) {
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const Eigen::Index a = i + di, b = j + dj;
                    if (a < 0 || b < 0 || a >= nx || b >= np) continue;
                    if (w.values(a, b) > v) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) maxima.emplace_back(i, j);
        }
    }
    std::stable_sort(maxima.begin(), maxima.end(),
                     [&](const auto& a, const auto& b) { return w.values(a.first, a.second) > w.values(b.first, b.second); });

    Eigen::MatrixXi owner = Eigen::MatrixXi::Constant(nx, np, -1);
    std::vector<Lobe> lobes;
    for (const auto& [pi, pj] : maxima) {
        if (owner(pi, pj) >= 0) continue;
        const double peak = w.values(pi, pj);
        const double half = 0.5 * peak;
        const int id = static_cast<int>(lobes.size());
        std::vector<std::pair<Eigen::Index, Eigen::Index>> stack{{pi, pj}}, region;
        bool merges = false;
        Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(nx, np);
        seen(pi, pj) = 1;
        while (!stack.empty()) {
            const auto [i, j] = stack.back();
            stack.pop_back();
            if (owner(i, j) >= 0) {
                merges = true;
                continue;
            }
            region.emplace_back(i, j);
            const Eigen::Index nb[4][2] = {{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}};
            for (const auto& n : nb) {
                if (n[0] < 0 || n[1] < 0 || n[0] >= nx || n[1] >= np) continue;
                if (seen(n[0], n[1]) || w.values(n[0], n[1]) < half) continue;
                seen(n[0], n[1]) = 1;
                stack.push_back({n[0], n[1]});
            }
        }
        if (merges) continue;   // a shoulder of a higher lobe
        Lobe lobe;
        lobe.peak_x = w.x_axis[pi];
        lobe.peak_p = w.p_axis[pj];
        lobe.peak_value = peak;
        double mass = 0.0;
        for (const auto& [i, j] : region) {
            owner(i, j) = id;
            const double v = w.values(i, j);
            mass += v;
            lobe.centroid_x += v * w.x_axis[i];
            lobe.centroid_p += v * w.p_axis[j];
        }
        lobe.centroid_x /= mass;
        lobe.centroid_p /= mass;
        lobe.cells = region.size();
        lobe.fwhm = 2.0 * std::sqrt(region.size() * w.cell_area / std::numbers::pi);
        lobes.push_back(lobe);
    }
    return lobes;
}

} // namespace duffing
