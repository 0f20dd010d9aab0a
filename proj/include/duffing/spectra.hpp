// spectra.hpp: Lab-frame and rotating-frame Hamiltonians and their spectra

#pragma once

#include "duffing/classical.hpp"
#include "duffing/errors.hpp"
#include "duffing/fock.hpp"
#include "duffing/params.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace duffing {

// H_S = n + 1/2 - gamma_tilde*aleph*x^4 (drive omitted). x^4 is formed in a basis
// four states larger and then cut, so every kept element is exact.
inline FockOperator lab_hamiltonian(const SystemParams& p) {
    const int dim = p.n_trunc;
    const FockOperator x = position(dim + 4, p);
    const Matrix x2 = x.matrix() * x.matrix();
    const Matrix x4 = (x2 * x2).topLeftCorner(dim, dim);
    Matrix h = -p.gamma_tilde * p.aleph * x4;
    for (int n = 0; n < dim; ++n) h(n, n) += n + 0.5;
    return FockOperator(std::move(h));
}

// Second-order perturbative levels E_n = n + 1/2 - 3 gamma_tilde (2n^2 + 2n + 1)/(4 aleph).
inline std::vector<double> perturbative_lab_levels(const SystemParams& p, int n_max) {
    if (n_max < 0) throw std::invalid_argument("perturbative_lab_levels: n_max must be >= 0");
    if (p.gamma_tilde > 0.0 && n_max >= p.aleph / (16.0 * p.gamma_tilde)) {
        throw std::invalid_argument("perturbative_lab_levels: n_max must stay below the bound-state count");
    }
    std::vector<double> e(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
        e[n] = n + 0.5 - 3.0 * p.gamma_tilde * (2.0 * n * n + 2.0 * n + 1.0) / (4.0 * p.aleph);
    }
    return e;
}

// Level spacing E_n - E_{n-1} = 1 - 3 gamma_tilde n / aleph.
inline double perturbative_lab_spacing(const SystemParams& p, int n) {
    return 1.0 - 3.0 * p.gamma_tilde * n / p.aleph;
}

// Undriven rotating-frame level delta(n + 1/2) - (3 gamma_tilde/(2 aleph))(n + 1/2)^2.
inline double rwa_level(const SystemParams& p, int n) {
    const double h = n + 0.5;
    return p.delta * h - 1.5 * p.gamma_tilde / p.aleph * h * h;
}

inline std::vector<double> rwa_levels(const SystemParams& p, int count) {
    std::vector<double> e(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) e[n] = rwa_level(p, n);
    return e;
}

// Eigenstates of the lab Hamiltonian matched to Fock labels by maximal overlap.
inline std::vector<double> lab_levels(const SystemParams& p, int count) {
    const FockOperator h = lab_hamiltonian(p);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) {
        Eigen::Index k = 0;
        es.eigenvectors().row(n).cwiseAbs().maxCoeff(&k);
        out[n] = es.eigenvalues()(k);
    }
    return out;
}

// ---------------------------------------------------------------------------

struct RotatingFrameSystem {
    SystemParams params;
    double drive_ratio{};            // F0/F_c
    double drive_force{};            // F0 in Hamiltonian units
    FockOperator h_rwa;
    Eigen::VectorXd eigenvalues;     // ascending
    Matrix eigenvectors;             // columns are the eigenstates in the Fock basis
    std::vector<int> fock_map;       // Fock label of eigenstate k (adiabatic continuation)

    int dim() const { return h_rwa.dim(); }

    Matrix to_eigenbasis(const Matrix& op) const { return eigenvectors.adjoint() * op * eigenvectors; }
    Matrix from_eigenbasis(const Matrix& op) const { return eigenvectors * op * eigenvectors.adjoint(); }

    // Eigen index carrying Fock label n.
    int eigen_index_of(int n) const {
        const auto it = std::find(fock_map.begin(), fock_map.end(), n);
        if (it == fock_map.end()) throw std::out_of_range("eigen_index_of: label not present");
        return static_cast<int>(it - fock_map.begin());
    }
};

// H~_S = delta(n + 1/2) - (3 gamma_tilde/(2 aleph))(n + 1/2)^2 + F0 x.
inline FockOperator rwa_matrix(const SystemParams& p, double drive_force) {
    const int dim = p.n_trunc;
    Matrix h = drive_force * position(dim, p).matrix();
    for (int n = 0; n < dim; ++n) h(n, n) += rwa_level(p, n);
    return FockOperator(std::move(h));
}

namespace detail {

inline constexpr double kTrackingAmbiguity = 1e-3;

// Greedy maximal-overlap matching of the previous eigenvectors onto the current ones.
// Returns, for each current column, the index of the previous column it continues.
inline std::vector<int> match_by_overlap(const Matrix& prev, const Matrix& cur, double step_ratio) {
    const Eigen::MatrixXd ov = (prev.adjoint() * cur).cwiseAbs2();
    const int n = static_cast<int>(ov.rows());
    std::vector<int> order(static_cast<std::size_t>(n) * n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return ov(a % n, a / n) > ov(b % n, b / n); });
    std::vector<int> cur_to_prev(n, -1);
    std::vector<char> prev_used(n, 0);
    int assigned = 0;
    for (int idx : order) {
        const int i = idx % n;
        const int j = idx / n;
        if (prev_used[i] || cur_to_prev[j] >= 0) continue;
        // Ambiguous if another unclaimed current state competes for i at the same overlap.
        for (int k = 0; k < n; ++k) {
            if (k == j || cur_to_prev[k] >= 0) continue;
            if (std::abs(ov(i, k) - ov(i, j)) < kTrackingAmbiguity && ov(i, j) > kTrackingAmbiguity) {
                throw DegenerateTracking("adiabatic tracking ambiguous at F0/F_c = " + std::to_string(step_ratio) +
                                         ": overlaps " + std::to_string(ov(i, j)) + " and " +
                                         std::to_string(ov(i, k)));
            }
        }
        cur_to_prev[j] = i;
        prev_used[i] = 1;
        if (++assigned == n) break;
    }
    return cur_to_prev;
}

} // namespace detail

// Diagonalises H~_S at F0 = drive_ratio * F_c and labels the eigenstates by ramping
// the drive up from zero in ramp_steps equal steps.
inline RotatingFrameSystem rwa_hamiltonian(const SystemParams& p, double drive_ratio, int ramp_steps = 100) {
    if (drive_ratio < 0.0) throw std::invalid_argument("rwa_hamiltonian: drive ratio must be >= 0");
    if (ramp_steps < 1) throw std::invalid_argument("rwa_hamiltonian: ramp_steps must be >= 1");
    RotatingFrameSystem sys;
    sys.params = p;
    sys.drive_ratio = drive_ratio;
    sys.drive_force = drive_ratio > 0.0 ? drive_ratio * classical::drive_unit(p) : 0.0;
    sys.h_rwa = rwa_matrix(p, sys.drive_force);

    const int dim = p.n_trunc;
    // At zero drive each eigenvector is a Fock state.
    Eigen::SelfAdjointEigenSolver<Matrix> es(rwa_matrix(p, 0.0).matrix());
    Matrix prev = es.eigenvectors();
    std::vector<int> labels(dim);
    for (int k = 0; k < dim; ++k) {
        Eigen::Index n = 0;
        prev.col(k).cwiseAbs().maxCoeff(&n);
        labels[k] = static_cast<int>(n);
    }
    if (sys.drive_force > 0.0) {
        for (int s = 1; s <= ramp_steps; ++s) {
            const double frac = static_cast<double>(s) / ramp_steps;
            es.compute(rwa_matrix(p, frac * sys.drive_force).matrix());
            const Matrix cur = es.eigenvectors();
            const auto cur_to_prev = detail::match_by_overlap(prev, cur, frac * drive_ratio);
            std::vector<int> next(dim);
            for (int j = 0; j < dim; ++j) next[j] = labels[cur_to_prev[j]];
            labels = std::move(next);
            prev = cur;
        }
    } else {
        es.compute(sys.h_rwa.matrix());
    }
    sys.eigenvalues = es.eigenvalues();
    sys.eigenvectors = es.eigenvectors();
    sys.fock_map = std::move(labels);
    return sys;
}

} // namespace duffing
