#include "duffing/wigner.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace duffing;

namespace {

// Normalised Hermite functions psi_n(X) for the quadrature X = (a + a^dag)/sqrt(2).
std::vector<double> hermite_functions(int count, double x) {
    std::vector<double> psi(count);
    psi[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    if (count > 1) psi[1] = std::sqrt(2.0) * x * psi[0];
    for (int n = 2; n < count; ++n) {
        psi[n] = std::sqrt(2.0 / n) * x * psi[n - 1] - std::sqrt((n - 1.0) / n) * psi[n - 2];
    }
    return psi;
}

// W(X, P) = (1/pi) Int dy <X + y|rho|X - y> exp(-2 i P y), by the trapezoid rule.
double wigner_direct(const Matrix& rho, double X, double P, double half_width = 8.0, int points = 4001) {
    const int dim = static_cast<int>(rho.rows());
    const double h = 2.0 * half_width / (points - 1);
    cplx sum{};
    for (int k = 0; k < points; ++k) {
        const double y = -half_width + k * h;
        const auto a = hermite_functions(dim, X + y);
        const auto b = hermite_functions(dim, X - y);
        cplx amp{};
        for (int m = 0; m < dim; ++m) {
            for (int n = 0; n < dim; ++n) amp += a[m] * rho(m, n) * b[n];
        }
        const double w = (k == 0 || k == points - 1) ? 0.5 : 1.0;
        sum += w * amp * std::polar(1.0, -2.0 * P * y);
    }
    return (sum * h).real() / std::numbers::pi;
}

} // namespace

TEST(Wigner, VacuumIsGaussian) {
    const Matrix rho = fock_state(0, 12).matrix();
    EXPECT_NEAR(wigner_point(rho, 0.0, 0.0).real(), 1.0 / std::numbers::pi, 1e-15);
    for (double x : {-1.5, 0.3, 2.0}) {
        for (double p : {-0.7, 0.0, 1.1}) {
            EXPECT_NEAR(wigner_point(rho, x, p).real(), std::exp(-x * x - p * p) / std::numbers::pi, 1e-14);
        }
    }
}

TEST(Wigner, FockOneCentralNegativityMatchesDirectIntegral) {
    const Matrix rho = fock_state(1, 6).matrix();
    const double kernel = wigner_point(rho, 0.0, 0.0).real();
    EXPECT_NEAR(kernel, -1.0 / std::numbers::pi, 1e-4);
    EXPECT_NEAR(kernel, wigner_direct(rho, 0.0, 0.0), 1e-8);
}

TEST(Wigner, KernelMatchesDirectIntegralForMixedState) {
    const int dim = 14;
    const Matrix a = coherent_state(cplx(0.9, -0.6), dim).matrix();
    const Matrix b = fock_state(3, dim).matrix();
    const Matrix rho = 0.5 * a + 0.5 * b;
    for (double x : {-1.0, 0.0, 0.8, 1.7}) {
        for (double p : {-1.2, 0.0, 0.5}) {
            EXPECT_NEAR(wigner_point(rho, x, p).real(), wigner_direct(rho, x, p), 1e-8) << x << "," << p;
        }
    }
}

TEST(Wigner, CoherentStateIsDisplacedGaussian) {
    const cplx alpha(1.2, -0.8);
    const auto g = wigner(coherent_state(alpha, 40).matrix(), GridSpec{8.0, 161});
    const auto [x0, p0] = phase_space_point(alpha);
    for (std::size_t i = 0; i < g.x_axis.size(); i += 13) {
        for (std::size_t j = 0; j < g.p_axis.size(); j += 11) {
            const double dx = g.x_axis[i] - x0, dp = g.p_axis[j] - p0;
            EXPECT_NEAR(g.values(i, j), std::exp(-dx * dx - dp * dp) / std::numbers::pi, 1e-12);
        }
    }
    EXPECT_NEAR(g.normalization(), 1.0, 1e-3);
    EXPECT_LT(g.max_imag, 1e-10);
}

TEST(Wigner, LargeTruncationStaysFinite) {
    const int dim = 60;
    const Matrix rho = fock_state(59, dim).matrix();
    const auto g = wigner(rho, GridSpec{14.0, 57}, 1, false);
    EXPECT_TRUE(g.values.allFinite());
    EXPECT_GE(g.min_value(), -1.0 / std::numbers::pi - 1e-6);
    EXPECT_LE(g.values.maxCoeff(), 1.0 / std::numbers::pi + 1e-6);
}

TEST(Wigner, MarginalMatchesPositionDistribution) {
    const int dim = 20;
    const Matrix rho = 0.7 * coherent_state(cplx(1.0, 0.5), dim).matrix() + 0.3 * fock_state(2, dim).matrix();
    const auto g = wigner(rho, GridSpec{7.0, 141});
    const double h = g.x_axis[1] - g.x_axis[0];
    double l1 = 0.0;
    for (std::size_t i = 0; i < g.x_axis.size(); ++i) {
        const double marginal = g.values.row(static_cast<Eigen::Index>(i)).sum() * h;
        const auto psi = hermite_functions(dim, g.x_axis[i]);
        cplx density{};
        for (int m = 0; m < dim; ++m) {
            for (int n = 0; n < dim; ++n) density += psi[m] * rho(m, n) * psi[n];
        }
        l1 += std::abs(marginal - density.real()) * h;
    }
    EXPECT_LT(l1, 1e-3);
}

TEST(Wigner, NonHermitianInputShowsImaginaryPart) {
    Matrix rho = fock_state(0, 4).matrix();
    rho(1, 0) = 0.2;   // only the lower element
    const auto g = wigner(rho, GridSpec{6.0, 31}, 1, false);
    EXPECT_GT(g.max_imag, 1e-3);
    const auto h = wigner(fock_state(2, 8).matrix(), GridSpec{6.0, 31});
    EXPECT_LT(h.max_imag, 1e-10);
}

TEST(Wigner, GridTooSmallIsReported) {
    EXPECT_THROW(wigner(coherent_state(cplx(2.0, 0.0), 40).matrix(), GridSpec{3.0, 41}), GridTooSmall);
}

TEST(Wigner, DecompositionExamples) {
    const int dim = 40;
    const GridSpec spec{8.0, 161};
    const auto ws = wigner(coherent_state(cplx(-1.0, 0.0), dim).matrix(), spec);
    const auto wl = wigner(coherent_state(cplx(2.5, -0.8), dim).matrix(), spec);
    const auto same = attractor_decomposition(ws, ws);
    EXPECT_NEAR(same.p_s, 1.0, 1e-12);
    EXPECT_NEAR(same.p_l, 0.0, 1e-12);
    WignerGrid mix = ws;
    mix.values = 0.5 * ws.values + 0.5 * wl.values;
    const auto half = attractor_decomposition(mix, ws);
    EXPECT_NEAR(half.p_s, 0.5, 1e-3);
    EXPECT_NEAR(half.p_l, 0.5, 1e-3);
    EXPECT_NEAR(half.p_s + half.p_l, 1.0, 1e-6);

    const auto lobes = find_lobes(mix);
    ASSERT_EQ(lobes.size(), 2u);
    const auto [xs, ps] = phase_space_point(cplx(-1.0, 0.0));
    const auto [xl, pl] = phase_space_point(cplx(2.5, -0.8));
    const Lobe& s = lobes[0].radius() < lobes[1].radius() ? lobes[0] : lobes[1];
    const Lobe& l = lobes[0].radius() < lobes[1].radius() ? lobes[1] : lobes[0];
    EXPECT_LT(std::hypot(s.centroid_x - xs, s.centroid_p - ps), 0.05);
    EXPECT_LT(std::hypot(l.centroid_x - xl, l.centroid_p - pl), 0.05);
    // a coherent lobe has FWHM 2 sqrt(ln 2) in these units
    EXPECT_NEAR(s.fwhm, 2.0 * std::sqrt(std::log(2.0)), 0.05);
}

TEST(Wigner, ProjectionEqualsOverlapForPureReference) {
    const int dim = 40;
    const GridSpec spec{8.0, 161};
    const Matrix ref = coherent_state(cplx(-0.8, 0.2), dim).matrix();
    const Matrix rho = 0.3 * ref + 0.7 * coherent_state(cplx(1.9, -0.5), dim).matrix();
    const auto dec = attractor_decomposition(wigner(rho, spec), wigner(ref, spec));
    EXPECT_NEAR(dec.p_s, (ref * rho).trace().real(), 0.05 * (ref * rho).trace().real());
}
