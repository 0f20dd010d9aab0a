// propagate.hpp: Fixed-step RK4 evolution of the rotating-frame density matrix

#pragma once

#include "duffing/bath.hpp"
#include "duffing/classical.hpp"
#include "duffing/errors.hpp"
#include "duffing/fock.hpp"
#include "duffing/parallel.hpp"
#include "duffing/params.hpp"
#include "duffing/spectra.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace duffing {

inline constexpr double kTraceDriftTol = 1e-6;

struct DynamicsOptions {
    bool include_counter_rotating{true};
    bool lindblad{false};
    int threads{0};            // 0: one per logical core
};

// drho/dt = -i[H~_S, rho] + D_t(rho). Holds scratch buffers, so one instance per thread.
class Generator {
public:
    using Dissipator = std::variant<DissipatorSet, LindbladChannels>;

    Generator(const FockOperator& h, Dissipator dissipator) : dissipator_(std::move(dissipator)) {
        const Matrix& m = h.matrix();
        const Eigen::Index d = m.rows();
        tridiagonal_ = true;
        for (Eigen::Index c = 0; c < d && tridiagonal_; ++c) {
            for (Eigen::Index r = 0; r < d; ++r) {
                if (std::abs(r - c) > 1 && m(r, c) != cplx{}) {
                    tridiagonal_ = false;
                    break;
                }
            }
        }
        h_ = m;
        diag_ = m.diagonal();
        upper_ = Vector::Zero(d);
        lower_ = Vector::Zero(d);
        for (Eigen::Index r = 0; r + 1 < d; ++r) {
            upper_(r) = m(r, r + 1);
            lower_(r + 1) = m(r + 1, r);
        }
    }

    Generator(const RotatingFrameSystem& sys, const SystemParams& p, const DynamicsOptions& opt)
        : Generator(sys.h_rwa, make_dissipator(sys, p, opt)) {}

    static Dissipator make_dissipator(const RotatingFrameSystem& sys, const SystemParams& p,
                                      const DynamicsOptions& opt) {
        if (opt.lindblad) return lindblad_dissipator(p, sys.dim());
        return build_dissipator(sys, p, opt.include_counter_rotating);
    }

    void operator()(double t, const Matrix& rho, Matrix& out) {
        unitary(rho, out);
        if (const auto* set = std::get_if<DissipatorSet>(&dissipator_)) {
            accumulate_dissipator(*set, rho, t, work_, out);
        } else {
            accumulate_dissipator(std::get<LindbladChannels>(dissipator_), rho, work_, out);
        }
    }

    const Dissipator& dissipator() const { return dissipator_; }

private:
    // out = -i (H rho - rho H)
    void unitary(const Matrix& rho, Matrix& out) {
        const Eigen::Index d = rho.rows();
        if (out.rows() != d || out.cols() != d) out.resize(d, d);
        if (!tridiagonal_) {
            out.noalias() = h_ * rho;
            out.noalias() -= rho * h_;
            out *= cplx(0.0, -1.0);
            return;
        }
        const cplx mi(0.0, -1.0);
        for (Eigen::Index c = 0; c < d; ++c) {
            for (Eigen::Index r = 0; r < d; ++r) {
                cplx hr = diag_(r) * rho(r, c);
                if (r + 1 < d) hr += upper_(r) * rho(r + 1, c);
                if (r > 0) hr += lower_(r) * rho(r - 1, c);
                cplx rh = rho(r, c) * diag_(c);
                if (c + 1 < d) rh += rho(r, c + 1) * lower_(c + 1);
                if (c > 0) rh += rho(r, c - 1) * upper_(c - 1);
                out(r, c) = mi * (hr - rh);
            }
        }
    }

    Dissipator dissipator_;
    Matrix h_;
    Vector diag_, upper_, lower_;
    bool tridiagonal_{false};
    DissipatorWorkspace work_;
};

// ---------------------------------------------------------------------------

struct Schedule {
    int record_stride{200};                     // steps between recorded samples
    std::vector<double> snapshot_periods;       // times (drive periods) at which to keep rho
    std::optional<DensityMatrix> reference;     // rho_s for P_S; defaults to rho0
};

// Redfield dynamics need not stay positive, so snapshots are raw (Hermitised) matrices.
struct Snapshot {
    double t_periods{};
    Matrix rho;
};

struct EvolutionRecord {
    std::vector<double> times;                  // drive periods, strictly increasing
    std::vector<cplx> x_bar;                    // Tr[x rho]
    std::vector<double> p_bar;                  // Re Tr[p rho]
    std::vector<double> p_s;                    // Tr[rho_s rho]
    std::vector<double> trace_drift;            // |Tr rho - 1|
    std::vector<double> hermiticity;            // max |rho - rho^dag|
    std::vector<double> top_occupation;
    std::vector<Snapshot> snapshots;
    Matrix final_state;

    double max_trace_drift() const { return max_of(trace_drift); }
    double max_hermiticity() const { return max_of(hermiticity); }
    double max_top_occupation() const { return max_of(top_occupation); }

private:
    static double max_of(const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, x);
        return m;
    }
};

inline long long step_count(const SystemParams& p) {
    const double span = p.t_final * 2.0 * std::numbers::pi;
    const long long n = std::llround(span / p.dt);
    if (n < 1 || std::abs(n * p.dt - span) > 1e-6 * span) {
        throw ConfigError("t_final must span a whole number of dt steps");
    }
    return n;
}

// Classical RK4 with fixed step p.dt from t = 0 to p.t_final drive periods.
inline EvolutionRecord evolve(const DensityMatrix& rho0, Generator& gen, const SystemParams& p,
                              const Schedule& schedule = {}) {
    if (schedule.record_stride < 1) throw std::invalid_argument("evolve: record_stride must be >= 1");
    const int dim = rho0.dim();
    const long long steps = step_count(p);
    const double dt = p.dt;
    const double period = 2.0 * std::numbers::pi;

    const Matrix x = position(dim, p).matrix();
    const Matrix mom = momentum(dim, p).matrix();
    const Matrix ref = schedule.reference ? schedule.reference->matrix() : rho0.matrix();
    if (ref.rows() != dim) throw std::invalid_argument("evolve: reference state dimension mismatch");

    std::vector<long long> snap_steps;
    for (double tp : schedule.snapshot_periods) {
        const long long k = std::llround(tp * period / dt);
        if (k < 0 || k > steps) throw std::invalid_argument("evolve: snapshot time outside the run");
        snap_steps.push_back(k);
    }

    EvolutionRecord rec;
    Matrix rho = rho0.matrix();
    Matrix k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), stage(dim, dim);

    auto trace_product = [](const Matrix& a, const Matrix& b) {
        // Tr[a b] without forming the product
        return (a.transpose().array() * b.array()).sum();
    };

    auto record = [&](long long k) {
        const double tp = k * dt / period;
        const double drift = std::abs(rho.trace() - cplx(1.0, 0.0));
        rec.times.push_back(tp);
        rec.x_bar.push_back(trace_product(x, rho));
        rec.p_bar.push_back(trace_product(mom, rho).real());
        rec.p_s.push_back(trace_product(ref, rho).real());
        rec.trace_drift.push_back(drift);
        rec.hermiticity.push_back((rho - rho.adjoint()).cwiseAbs().maxCoeff());
        rec.top_occupation.push_back(top_occupation(rho));
        if (drift > kTraceDriftTol) {
            throw TraceDrift("trace drifted by " + std::to_string(drift) + " at t = " + std::to_string(tp) +
                             " periods");
        }
    };

    auto snapshot = [&](long long k) {
        for (long long s : snap_steps) {
            if (s == k) {
                rec.snapshots.push_back({k * dt / period, 0.5 * (rho + rho.adjoint())});
            }
        }
    };

    record(0);
    snapshot(0);
    for (long long k = 0; k < steps; ++k) {
        const double t = k * dt;
        gen(t, rho, k1);
        stage = rho + (0.5 * dt) * k1;
        gen(t + 0.5 * dt, stage, k2);
        stage = rho + (0.5 * dt) * k2;
        gen(t + 0.5 * dt, stage, k3);
        stage = rho + dt * k3;
        gen(t + dt, stage, k4);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        check_truncation(rho, (k + 1) * dt / period);
        if ((k + 1) % schedule.record_stride == 0 || k + 1 == steps) record(k + 1);
        snapshot(k + 1);
    }
    rec.final_state = std::move(rho);
    return rec;
}

inline EvolutionRecord evolve(const DensityMatrix& rho0, const RotatingFrameSystem& sys, const DissipatorSet& diss,
                              const SystemParams& p, const Schedule& schedule = {}) {
    Generator gen(sys.h_rwa, diss);
    return evolve(rho0, gen, p, schedule);
}

inline EvolutionRecord evolve(const DensityMatrix& rho0, const RotatingFrameSystem& sys,
                              const LindbladChannels& diss, const SystemParams& p, const Schedule& schedule = {}) {
    Generator gen(sys.h_rwa, diss);
    return evolve(rho0, gen, p, schedule);
}

// ---------------------------------------------------------------------------
// Attractor initial conditions

enum class Attractor { sas, las };

inline const char* to_string(Attractor a) { return a == Attractor::sas ? "SAS" : "LAS"; }

struct InitialState {
    cplx alpha{};
    bool fallback{false};   // the requested attractor does not exist at this drive
    DensityMatrix rho;
};

// SAS/LAS coherent state from the shifted-detuning stationary amplitudes. Above the
// shifted bifurcation point the SAS is replaced by the vacuum; below the lower
// critical drive the LAS is seeded with the large amplitude at which it is born.
inline InitialState attractor_state(const SystemParams& p, double drive_ratio, Attractor which) {
    const auto amps = classical::attractor_coherent_amplitudes(p, drive_ratio);
    cplx alpha{};
    bool fallback = false;
    if (which == Attractor::sas) {
        if (amps.sas) {
            alpha = *amps.sas;
        } else {
            fallback = true;
        }
    } else {
        if (amps.las) {
            alpha = *amps.las;
        } else {
            alpha = classical::las_at_birth(p);
            fallback = true;
        }
    }
    return {alpha, fallback, coherent_state(alpha, p.n_trunc)};
}

// rho_s = |alpha_SAS><alpha_SAS| (vacuum when the SAS does not exist).
inline DensityMatrix sas_reference(const SystemParams& p, double drive_ratio) {
    return attractor_state(p, drive_ratio, Attractor::sas).rho;
}

struct Run {
    InitialState initial;
    RotatingFrameSystem system;
    EvolutionRecord record;
};

// Builds H~_S at the drive and evolves from the chosen attractor. P_S is measured against the SAS.
inline Run run_from_attractor(const SystemParams& p, double drive_ratio, Attractor init,
                              const DynamicsOptions& opt, Schedule schedule = {}) {
    Run run{attractor_state(p, drive_ratio, init), rwa_hamiltonian(p, drive_ratio), {}};
    if (!schedule.reference) schedule.reference = sas_reference(p, drive_ratio);
    Generator gen(run.system, p, opt);
    run.record = evolve(run.initial.rho, gen, p, schedule);
    return run;
}

struct SweepPoint {
    double drive_ratio{};
    Attractor init{Attractor::sas};
    cplx alpha0{};
    bool fallback{false};
    cplx x_bar{};           // Tr[x rho] at t_final
    double p_bar{};
    double p_s{};
    double max_top_occupation{};
};

// Steady-state amplitude protocol: evolve each drive to t_final and read x_bar there.
inline std::vector<SweepPoint> hysteresis_sweep(const SystemParams& p, const std::vector<double>& drive_grid,
                                                Attractor init, const DynamicsOptions& opt) {
    for (std::size_t i = 1; i < drive_grid.size(); ++i) {
        if (!(drive_grid[i] > drive_grid[i - 1])) {
            throw std::invalid_argument("hysteresis_sweep: drive grid must be strictly ascending");
        }
    }
    Schedule schedule;
    schedule.record_stride = 1 << 30;   // only t = 0 and t_final
    return parallel_map(drive_grid.size(), opt.threads, [&](std::size_t i) {
        const Run run = run_from_attractor(p, drive_grid[i], init, opt, schedule);
        SweepPoint pt;
        pt.drive_ratio = drive_grid[i];
        pt.init = init;
        pt.alpha0 = run.initial.alpha;
        pt.fallback = run.initial.fallback;
        pt.x_bar = run.record.x_bar.back();
        pt.p_bar = run.record.p_bar.back();
        pt.p_s = run.record.p_s.back();
        pt.max_top_occupation = run.record.max_top_occupation();
        return pt;
    });
}

} // namespace duffing
