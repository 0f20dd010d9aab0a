#include "duffing/propagate.hpp"
#include "duffing/selftest.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace duffing;

TEST(Propagate, TridiagonalCommutatorMatchesDense) {
    const SystemParams p;
    const auto sys = rwa_hamiltonian(p, 0.7);
    SystemParams frictionless = p;
    frictionless.kappa = 0.0;
    Generator gen(sys.h_rwa, build_dissipator(sys, frictionless));
    const Matrix rho = coherent_state(cplx(0.7, 0.9), sys.dim()).matrix();
    Matrix out(sys.dim(), sys.dim());
    gen(0.0, rho, out);
    const Matrix& h = sys.h_rwa.matrix();
    const Matrix expected = cplx(0.0, -1.0) * (h * rho - rho * h);
    EXPECT_LT((out - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Propagate, HarmonicDecayOverFiftyPeriods) {
    SystemParams h = harmonic_params();
    h.t_final = 50.0;
    const auto sys = rwa_hamiltonian(h, 0.0);
    DynamicsOptions opt;
    opt.include_counter_rotating = false;
    Generator gen(sys, h, opt);
    Schedule s;
    s.record_stride = 1000;
    for (int k = 1; k <= 10; ++k) s.snapshot_periods.push_back(5.0 * k);
    const auto rec = evolve(coherent_state(cplx(2.0, 0.0), sys.dim()), gen, h, s);
    ASSERT_EQ(rec.snapshots.size(), 10u);
    const Matrix n = number(sys.dim()).matrix();
    for (const auto& snap : rec.snapshots) {
        const double expected = 4.0 * std::exp(-h.kappa * snap.t_periods * 2.0 * std::numbers::pi);
        const double got = (n * snap.rho).trace().real();
        EXPECT_LT(std::abs(got - expected) / expected, 1e-4) << snap.t_periods;
    }
}

// With the e^{+-2i nu t} terms kept the decay deviates at the level kappa/2.
TEST(Propagate, CounterRotatingTermsPerturbHarmonicDecayWeakly) {
    SystemParams h = harmonic_params();
    h.t_final = 10.0;
    const auto sys = rwa_hamiltonian(h, 0.0);
    Generator gen(sys, h, DynamicsOptions{});
    Schedule s;
    s.snapshot_periods = {10.0};
    const auto rec = evolve(coherent_state(cplx(2.0, 0.0), sys.dim()), gen, h, s);
    const double expected = 4.0 * std::exp(-h.kappa * 20.0 * std::numbers::pi);
    const double got = (number(sys.dim()).matrix() * rec.snapshots[0].rho).trace().real();
    EXPECT_LT(std::abs(got - expected) / expected, 0.02);
}

TEST(Propagate, ClosedSystemConservesPurity) {
    SystemParams p;
    p.t_final = 10.0;
    const auto sys = rwa_hamiltonian(p, 0.7);
    SystemParams frictionless = p;
    frictionless.kappa = 0.0;
    Generator gen(sys.h_rwa, build_dissipator(sys, frictionless));
    Schedule s;
    s.snapshot_periods = {0.0, 10.0};
    const auto rec = evolve(coherent_state(cplx(0.5, -0.3), sys.dim()), gen, p, s);
    const Matrix& r = rec.snapshots.back().rho;
    EXPECT_NEAR((r * r).trace().real(), 1.0, 1e-8);
}

TEST(Propagate, StructureInvariantsOnShortRun) {
    SystemParams p;
    p.t_final = 20.0;
    Schedule s;
    s.record_stride = 50;
    const duffing::Run run = run_from_attractor(p, 0.72, Attractor::sas, DynamicsOptions{}, s);
    const auto& rec = run.record;
    ASSERT_EQ(rec.times.size(), 81u);
    for (std::size_t i = 1; i < rec.times.size(); ++i) EXPECT_GT(rec.times[i], rec.times[i - 1]);
    EXPECT_NEAR(rec.times.back(), 20.0, 1e-12);
    EXPECT_LT(rec.max_trace_drift(), 1e-6);
    EXPECT_LT(rec.max_hermiticity(), 1e-8);
    EXPECT_LT(rec.max_top_occupation(), kWatchdogTol);
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        EXPECT_GE(rec.p_s[i], 0.0);
        EXPECT_LE(rec.p_s[i], 1.0 + 1e-6);
        EXPECT_LT(std::abs(rec.x_bar[i].imag()), 1e-10);
    }
    EXPECT_NEAR(rec.p_s.front(), 1.0, 1e-12);
}

TEST(Propagate, LindbladModeRuns) {
    SystemParams p;
    p.t_final = 5.0;
    DynamicsOptions opt;
    opt.lindblad = true;
    const duffing::Run run = run_from_attractor(p, 0.7, Attractor::sas, opt);
    EXPECT_LT(run.record.max_trace_drift(), 1e-6);
    EXPECT_GT(run.record.p_s.back(), 0.9);
}

TEST(Propagate, WatchdogAbortsRunawayState) {
    SystemParams p;
    p.n_trunc = 36;
    p.t_final = 10.0;
    const FockOperator h = 5.0 * position(36, p);
    Generator gen(h, lindblad_dissipator(p, 36));
    EXPECT_THROW(evolve(fock_state(0, 36), gen, p), TruncationOverflow);
}

TEST(Propagate, RejectsFractionalStepCount) {
    SystemParams p;
    p.t_final = 1.0;
    p.dt = 0.3;
    EXPECT_THROW(step_count(p), ConfigError);
    p.dt = 2.0 * std::numbers::pi / 200.0;
    EXPECT_EQ(step_count(p), 200);
}

TEST(Propagate, AttractorFallbacks) {
    const SystemParams p;
    const auto sas_above = attractor_state(p, 0.85, Attractor::sas);
    EXPECT_TRUE(sas_above.fallback);
    EXPECT_EQ(sas_above.alpha, cplx{});
    const auto las_below = attractor_state(p, 0.1, Attractor::las);
    EXPECT_TRUE(las_below.fallback);
    EXPECT_EQ(las_below.alpha, classical::las_at_birth(p));
    const auto ok = attractor_state(p, 0.7, Attractor::las);
    EXPECT_FALSE(ok.fallback);
    EXPECT_NEAR(ok.rho.expectation(annihilation(p.n_trunc)).real(), ok.alpha.real(), 1e-9);
}

TEST(Propagate, SweepIsDeterministicAcrossThreadCounts) {
    SystemParams p;
    p.t_final = 1.0;
    const std::vector<double> grid{0.5, 0.6, 0.9};
    DynamicsOptions one;
    one.threads = 1;
    DynamicsOptions three;
    three.threads = 3;
    const auto a = hysteresis_sweep(p, grid, Attractor::las, one);
    const auto b = hysteresis_sweep(p, grid, Attractor::las, three);
    ASSERT_EQ(a.size(), 3u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].drive_ratio, grid[i]);
        EXPECT_EQ(a[i].x_bar, b[i].x_bar);
        EXPECT_EQ(a[i].p_s, b[i].p_s);
    }
    EXPECT_THROW(hysteresis_sweep(p, {0.6, 0.5}, Attractor::sas, one), std::invalid_argument);
}

// At 0.7 F_c the SAS leaks towards the LAS on the scale of a hundred periods: P_S falls
// and x_bar moves from the lower stationary amplitude towards the upper one.
TEST(Propagate, SasLeaksTowardsUpperBranch) {
    SystemParams p;
    p.t_final = 60.0;
    const duffing::Run run = run_from_attractor(p, 0.7, Attractor::sas, DynamicsOptions{});
    const auto amps = classical::attractor_coherent_amplitudes(p, 0.7);
    const double lower = coherent_x_bar(*amps.sas, p);
    const double upper = coherent_x_bar(*amps.las, p);
    const auto& rec = run.record;
    EXPECT_NEAR(rec.x_bar.front().real(), lower, 1e-9);
    const double x = rec.x_bar.back().real();
    EXPECT_GT(x, lower);
    EXPECT_LT(x, upper);
    EXPECT_LT(rec.p_s.back(), 0.9);
    EXPECT_GT(rec.p_s.back(), 0.1);
}
