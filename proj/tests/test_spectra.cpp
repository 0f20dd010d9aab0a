#include "duffing/spectra.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace duffing;

TEST(Spectra, HarmonicLabSpectrum) {
    SystemParams p;
    p.gamma_tilde = 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(lab_hamiltonian(p).matrix());
    for (int n = 0; n < p.n_trunc; ++n) EXPECT_NEAR(es.eigenvalues()(n), n + 0.5, 1e-12);
    const auto pert = perturbative_lab_levels(p, 5);
    for (int n = 0; n <= 5; ++n) EXPECT_DOUBLE_EQ(pert[n], n + 0.5);
}

TEST(Spectra, GroundStateAgreesWithPerturbation) {
    const SystemParams p;
    const auto lab = lab_levels(p, 4);
    const double e0 = 0.5 - 3.0 * p.gamma_tilde / (4.0 * p.aleph);
    EXPECT_NEAR(perturbative_lab_levels(p, 0)[0], e0, 1e-15);
    EXPECT_NEAR(lab[0], e0, 1e-3);
    // parity: the undriven ground state has <x> = 0
    Eigen::SelfAdjointEigenSolver<Matrix> es(lab_hamiltonian(p).matrix());
    Eigen::Index k = 0;
    es.eigenvectors().row(0).cwiseAbs().maxCoeff(&k);
    const Vector g = es.eigenvectors().col(k);
    EXPECT_NEAR(std::abs(g.dot(position(p.n_trunc, p).matrix() * g)), 0.0, 1e-12);
}

TEST(Spectra, PerturbativeSpacing) {
    const SystemParams p;
    EXPECT_NEAR(perturbative_lab_spacing(p, 1), 0.98958333333, 1e-10);
    const auto e = perturbative_lab_levels(p, 10);
    for (int n = 1; n <= 10; ++n) EXPECT_NEAR(e[n] - e[n - 1], perturbative_lab_spacing(p, n), 1e-12);
    EXPECT_THROW(perturbative_lab_levels(p, 18), std::invalid_argument);
}

TEST(Spectra, UndrivenRotatingFrame) {
    const SystemParams p;
    const auto sys = rwa_hamiltonian(p, 0.0);
    EXPECT_NEAR(rwa_level(p, 0), 0.031198, 1e-6);
    const auto closed = rwa_levels(p, p.n_trunc);
    std::vector<double> sorted = closed;
    std::sort(sorted.begin(), sorted.end());
    for (int k = 0; k < p.n_trunc; ++k) EXPECT_NEAR(sys.eigenvalues(k), sorted[k], 1e-13);
    const auto top = std::max_element(closed.begin(), closed.begin() + 18) - closed.begin();
    EXPECT_EQ(top, 6);
    // labels follow the energy sort of the closed-form levels
    for (int k = 0; k < p.n_trunc; ++k) EXPECT_NEAR(closed[sys.fock_map[k]], sys.eigenvalues(k), 1e-13);
}

TEST(Spectra, DrivenSystemInvariants) {
    const SystemParams p;
    const auto sys = rwa_hamiltonian(p, 0.7);
    const int d = sys.dim();
    EXPECT_LT(sys.h_rwa.hermiticity_error(), 1e-12);
    const Matrix u = sys.eigenvectors.adjoint() * sys.eigenvectors;
    EXPECT_LT((u - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-10);
    for (int k = 1; k < d; ++k) EXPECT_LE(sys.eigenvalues(k - 1), sys.eigenvalues(k));
    std::vector<int> perm = sys.fock_map;
    std::sort(perm.begin(), perm.end());
    std::vector<int> iota(d);
    std::iota(iota.begin(), iota.end(), 0);
    EXPECT_EQ(perm, iota);
    // eigen-decomposition reproduces H
    const Matrix h = sys.from_eigenbasis(sys.eigenvalues.cast<cplx>().asDiagonal().toDenseMatrix());
    EXPECT_LT((h - sys.h_rwa.matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Spectra, FockMapStableUnderRampRefinement) {
    const SystemParams p;
    const auto coarse = rwa_hamiltonian(p, 0.7, 100);
    const auto fine = rwa_hamiltonian(p, 0.7, 200);
    EXPECT_EQ(coarse.fock_map, fine.fock_map);
}

TEST(Spectra, DriveForceUsesCriticalUnit) {
    const SystemParams p;
    const auto sys = rwa_hamiltonian(p, 0.5);
    EXPECT_NEAR(sys.drive_force, 0.5 * 0.30820808169845676, 1e-12);
    EXPECT_THROW(rwa_hamiltonian(p, -0.1), std::invalid_argument);
}

TEST(Spectra, AmbiguousTrackingIsReported) {
    // Two identical columns are equally good continuations of the same previous state.
    Matrix prev = Matrix::Identity(2, 2);
    Matrix cur(2, 2);
    const double s = std::sqrt(0.5);
    cur << s, s, s, -s;
    EXPECT_THROW(detail::match_by_overlap(prev, cur, 0.5), DegenerateTracking);
    EXPECT_NO_THROW(detail::match_by_overlap(prev, prev, 0.5));
}
