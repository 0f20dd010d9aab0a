// duffing: command-line driver for the driven Duffing oscillator simulations

#include "duffing/duffing.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace duffing;

namespace {

struct GlobalOptions {
    std::string config;
    std::string out{"."};
    int threads{0};
    bool no_counter_rotating{false};
    bool lindblad{false};
};

DynamicsOptions dynamics(const GlobalOptions& g) {
    DynamicsOptions o;
    o.include_counter_rotating = !g.no_counter_rotating;
    o.lindblad = g.lindblad;
    o.threads = g.threads;
    return o;
}

std::vector<double> stepped_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || hi < lo) throw ConfigError("grid needs step > 0 and max >= min");
    const long long n = std::llround((hi - lo) / step);
    std::vector<double> g;
    for (long long i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
    return g;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            v.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse '" + item + "' in drive list");
        }
    }
    if (v.empty()) throw ConfigError("empty drive list");
    return v;
}

Attractor parse_init(const std::string& s) {
    if (s == "sas" || s == "SAS") return Attractor::sas;
    if (s == "las" || s == "LAS") return Attractor::las;
    throw ConfigError("--init must be sas or las");
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

double nan_or(const std::optional<double>& v) { return v.value_or(std::numeric_limits<double>::quiet_NaN()); }

// Collects output paths, then writes the manifest next to them.
class Session {
public:
    Session(std::string subcommand, const SystemParams& p, const GlobalOptions& g)
        : start_(std::chrono::steady_clock::now()), dir_(g.out) {
        manifest_.subcommand = std::move(subcommand);
        manifest_.params = p;
        manifest_.options = json{{"config_path", g.config},
                                 {"threads", g.threads},
                                 {"counter_rotating", !g.no_counter_rotating},
                                 {"lindblad", g.lindblad}};
        fs::create_directories(dir_);
    }

    fs::path path(const std::string& name) {
        manifest_.outputs.push_back(name);
        return dir_ / name;
    }

    void option(const std::string& key, json value) { manifest_.options[key] = std::move(value); }

    void finish() {
        manifest_.wall_clock_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        write_json(dir_ / (manifest_.subcommand + "_manifest.json"), manifest_.to_json());
    }

private:
    std::chrono::steady_clock::time_point start_;
    fs::path dir_;
    RunManifest manifest_;
};

// ---------------------------------------------------------------------------

int cmd_spectrum(const SystemParams& p, const GlobalOptions& g) {
    Session s("spectrum", p, g);
    const DerivedParams d = derived_quantities(p);
    const int levels = p.gamma_tilde > 0.0 ? static_cast<int>(std::ceil(d.n_bound)) : std::min(p.n_trunc, 20);
    const auto lab = lab_levels(p, std::min(levels, p.n_trunc));
    const int pert_max = std::max(0, static_cast<int>(std::ceil(d.n_bound)) - 1);
    const auto pert = perturbative_lab_levels(p, std::min(pert_max, static_cast<int>(lab.size()) - 1));
    {
        CsvWriter csv(s.path("spectrum_lab.csv"), {"n", "E_numeric", "E_perturbative"});
        for (std::size_t n = 0; n < lab.size(); ++n) {
            const double e = n < pert.size() ? pert[n] : std::numeric_limits<double>::quiet_NaN();
            csv.row({static_cast<double>(n), lab[n], e});
        }
    }
    const auto sys = rwa_hamiltonian(p, p.drive_ratio);
    {
        CsvWriter csv(s.path("spectrum_rwa.csv"), {"k", "fock_label", "E_driven", "E_undriven"});
        for (int k = 0; k < sys.dim(); ++k) {
            csv.row({static_cast<double>(k), static_cast<double>(sys.fock_map[k]), sys.eigenvalues(k),
                     rwa_level(p, sys.fock_map[k])});
        }
    }
    const json summary{{"Q", d.Q},
                       {"Delta", d.Delta},
                       {"Delta_shifted", d.Delta_shifted},
                       {"n_resonant", d.n_resonant},
                       {"n_bound", d.n_bound},
                       {"n_thermal", d.n_thermal},
                       {"x_zpf", d.x_zpf},
                       {"drive_ratio", p.drive_ratio},
                       {"drive_force", sys.drive_force}};
    write_json(s.path("spectrum.json"), summary);
    s.finish();
    std::printf("spectrum: n* = %.4g, N_b = %.4g, %d lab levels written\n", d.n_resonant, d.n_bound,
                static_cast<int>(lab.size()));
    return 0;
}

int cmd_bifurcation(const SystemParams& p, const GlobalOptions& g, double lo, double hi, double step) {
    Session s("bifurcation", p, g);
    derived_quantities(p);
    const auto grid = stepped_grid(lo, hi, step);
    json block;
    for (bool shifted : {false, true}) {
        const auto d = classical::bifurcation_diagram(p, grid, shifted);
        CsvWriter csv(s.path(shifted ? "bifurcation_shifted.csv" : "bifurcation.csv"),
                      {"F0_over_Fc", "r_lower", "r_middle", "r_upper", "stable_lower", "stable_middle", "stable_upper"});
        for (const auto& pt : d.points) {
            std::optional<double> r[3];
            double st[3] = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::quiet_NaN()};
            for (const auto& root : pt.roots) {
                const int b = static_cast<int>(root.branch);
                r[b] = root.r;
                st[b] = root.stable ? 1.0 : 0.0;
            }
            csv.row({pt.drive_ratio, nan_or(r[0]), nan_or(r[1]), nan_or(r[2]), st[0], st[1], st[2]});
        }
        block[shifted ? "shifted" : "classical"] = json{{"Delta", d.Delta},
                                                       {"f_B", d.forces.f_B},
                                                       {"f_Bbar", d.forces.f_Bbar},
                                                       {"f_c", d.forces.f_c},
                                                       {"F_B_over_Fc", d.f_B_ratio},
                                                       {"F_Bbar_over_Fc", d.f_Bbar_ratio}};
    }
    const double shifted_ratio = classical::quantum_shifted_bifurcation(p);
    block["f_B"] = block["classical"]["f_B"];
    block["f_Bbar"] = block["classical"]["f_Bbar"];
    block["F_B_shifted_over_Fc"] = shifted_ratio;
    block["F_c"] = classical::drive_unit(p);
    write_json(s.path("bifurcation.json"), block);
    s.finish();
    std::printf("bifurcation: F_B(shifted)/F_c = %.5f\n", shifted_ratio);
    return 0;
}

int cmd_evolve(const SystemParams& p, const GlobalOptions& g, const std::string& init_name, int stride) {
    Session s("evolve", p, g);
    derived_quantities(p);
    const Attractor init = parse_init(init_name);
    s.option("init", init_name);
    s.option("record_stride", stride);
    Schedule sched;
    sched.record_stride = stride;
    const Run run = run_from_attractor(p, p.drive_ratio, init, dynamics(g), sched);
    const auto& rec = run.record;
    {
        CsvWriter csv(s.path("evolve.csv"), {"t_periods", "x_bar_re", "x_bar_im", "p_s", "trace_drift"});
        for (std::size_t i = 0; i < rec.times.size(); ++i) {
            csv.row({rec.times[i], rec.x_bar[i].real(), rec.x_bar[i].imag(), rec.p_s[i], rec.trace_drift[i]});
        }
    }
    {
        CsvWriter csv(s.path("evolve_diagnostics.csv"),
                      {"t_periods", "x_bar", "p_bar", "hermiticity", "top_occupation"});
        for (std::size_t i = 0; i < rec.times.size(); ++i) {
            csv.row({rec.times[i], rec.x_bar[i].real(), rec.p_bar[i], rec.hermiticity[i], rec.top_occupation[i]});
        }
    }
    write_json(s.path("evolve.json"), json{{"init", to_string(init)},
                                            {"alpha0", complex_json(run.initial.alpha)},
                                            {"fallback_initial_state", run.initial.fallback},
                                            {"x_bar_final", rec.x_bar.back().real()},
                                            {"p_s_final", rec.p_s.back()},
                                            {"max_trace_drift", rec.max_trace_drift()},
                                            {"max_hermiticity", rec.max_hermiticity()},
                                            {"max_top_occupation", rec.max_top_occupation()}});
    s.finish();
    std::printf("evolve: x_bar(t_final) = %.6f, P_S(t_final) = %.6f\n", rec.x_bar.back().real(), rec.p_s.back());
    return 0;
}

int cmd_sweep(const SystemParams& p, const GlobalOptions& g, double lo, double hi, double step) {
    Session s("sweep", p, g);
    derived_quantities(p);
    const auto grid = stepped_grid(lo, hi, step);
    const auto opt = dynamics(g);
    log::info("sweep: " + std::to_string(grid.size()) + " drives x 2 initial states");
    const auto sas = hysteresis_sweep(p, grid, Attractor::sas, opt);
    const auto las = hysteresis_sweep(p, grid, Attractor::las, opt);
    std::vector<double> xs, xl;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        xs.push_back(sas[i].x_bar.real());
        xl.push_back(las[i].x_bar.real());
    }
    const auto h = summarize_hysteresis(p, grid, xs, xl);
    {
        CsvWriter csv(s.path("sweep.csv"), {"F0_over_Fc", "x_bar_sas", "x_bar_las", "p_s_sas", "p_s_las",
                                            "x_stationary_lower", "x_stationary_upper"});
        for (std::size_t i = 0; i < grid.size(); ++i) {
            csv.row({grid[i], xs[i], xl[i], sas[i].p_s, las[i].p_s, h.lower_x[i], h.upper_x[i]});
        }
    }
    json fallbacks = json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (sas[i].fallback) fallbacks.push_back(json{{"F0_over_Fc", grid[i]}, {"init", "SAS"}});
        if (las[i].fallback) fallbacks.push_back(json{{"F0_over_Fc", grid[i]}, {"init", "LAS"}});
    }
    write_json(s.path("sweep.json"), json{{"jump_F0_over_Fc", h.jump_ratio},
                                          {"jump_height", h.jump_height},
                                          {"las_persists_below_jump", h.las_persists},
                                          {"las_persist_F0_over_Fc", h.persist_ratio},
                                          {"shifted_bifurcation_ratio", classical::quantum_shifted_bifurcation(p)},
                                          {"fallback_initial_states", fallbacks}});
    s.finish();
    std::printf("sweep: SAS jump at F0/F_c = %.3f, LAS persists below it: %s\n", h.jump_ratio,
                h.las_persists ? "yes" : "no");
    return 0;
}

int cmd_wigner(const SystemParams& p, const GlobalOptions& g, const std::string& init_name, double at,
               double extent, int points) {
    Session s("wigner", p, g);
    derived_quantities(p);
    const Attractor init = parse_init(init_name);
    const double t_snap = at < 0.0 ? p.t_final : at;
    s.option("init", init_name);
    s.option("time_periods", t_snap);
    s.option("extent", extent);
    s.option("points", points);
    Schedule sched;
    sched.snapshot_periods = {t_snap};
    sched.record_stride = 1 << 30;
    if (!(t_snap > 0.0)) throw ConfigError("--time must be > 0 drive periods");
    SystemParams q = p;
    q.t_final = t_snap;
    const Run run = run_from_attractor(q, p.drive_ratio, init, dynamics(g), sched);
    const auto& snap = run.record.snapshots.front();
    const GridSpec spec{extent, points};
    WignerGrid w = wigner(snap.rho, spec, g.threads);
    w.quadrature_scale = std::sqrt(2.0) * p.x_zpf();
    const double min_eigenvalue = inspect_density(snap.rho).min_eigenvalue;
    const auto amps = classical::attractor_coherent_amplitudes(p, p.drive_ratio);
    const DensityMatrix rho_s = sas_reference(p, p.drive_ratio);
    const WignerGrid w_s = wigner(rho_s, p, spec, g.threads);
    const auto dec = attractor_decomposition(w, w_s);
    const double overlap = (rho_s.matrix() * snap.rho).trace().real();
    {
        CsvWriter csv(s.path("wigner.csv"), {"x", "p", "W"});
        for (std::size_t i = 0; i < w.x_axis.size(); ++i) {
            for (std::size_t j = 0; j < w.p_axis.size(); ++j) csv.row({w.x_axis[i], w.p_axis[j], w.values(i, j)});
        }
    }
    json lobes = json::array();
    for (const auto& l : find_lobes(w)) {
        lobes.push_back(json{{"peak", {l.peak_x, l.peak_p}},
                             {"peak_value", l.peak_value},
                             {"centroid", {l.centroid_x, l.centroid_p}},
                             {"fwhm", l.fwhm}});
    }
    json predicted = json::object();
    if (amps.sas) {
        const auto [x, pp] = phase_space_point(*amps.sas);
        predicted["SAS"] = {x, pp};
    }
    if (amps.las) {
        const auto [x, pp] = phase_space_point(*amps.las);
        predicted["LAS"] = {x, pp};
    }
    write_json(s.path("wigner.json"),
               json{{"time_periods", snap.t_periods},
                    {"init", to_string(init)},
                    {"extent", extent},
                    {"points", points},
                    {"axis_units", "X = (a + a^dag)/sqrt(2), P = i(a^dag - a)/sqrt(2)"},
                    {"quadrature_scale", w.quadrature_scale},
                    {"cell_area", w.cell_area},
                    {"normalization", w.normalization()},
                    {"min_value", w.min_value()},
                    {"max_imag", w.max_imag},
                    {"min_density_eigenvalue", min_eigenvalue},
                    {"P_S_projection", dec.p_s},
                    {"P_L_remainder", dec.p_l},
                    {"P_S_overlap", overlap},
                    {"lobes", lobes},
                    {"predicted_centers", predicted}});
    s.finish();
    std::printf("wigner: t = %.1f periods, P_S = %.4f (overlap %.4f), P_L = %.4f\n", snap.t_periods, dec.p_s,
                overlap, dec.p_l);
    return 0;
}

int cmd_rate(const SystemParams& p, const GlobalOptions& g, int stride) {
    Session s("rate", p, g);
    derived_quantities(p);
    s.option("record_stride", stride);
    Schedule sched;
    sched.record_stride = stride;
    const Run run = run_from_attractor(p, p.drive_ratio, Attractor::sas, dynamics(g), sched);
    const auto fit = tunneling_rate(run.record);
    {
        CsvWriter csv(s.path("rate.csv"), {"t_periods", "p_s", "ln_p_s", "in_window"});
        for (std::size_t i = 0; i < run.record.times.size(); ++i) {
            const double t = run.record.times[i];
            const double ps = run.record.p_s[i];
            const bool in = t >= fit.t_start - 1e-9 && t <= fit.t_end + 1e-9;
            csv.row({t, ps, ps > 0.0 ? std::log(ps) : std::numeric_limits<double>::quiet_NaN(), in ? 1.0 : 0.0});
        }
    }
    write_json(s.path("rate.json"), json{{"F0_over_Fc", p.drive_ratio},
                                         {"gamma_t", fit.gamma_t},
                                         {"window", {fit.t_start, fit.t_end}},
                                         {"r_squared", fit.r_squared},
                                         {"accepted", fit.accepted},
                                         {"samples", fit.samples}});
    s.finish();
    std::printf("rate: Gamma_t = %.6g per period, r^2 = %.6f%s\n", fit.gamma_t, fit.r_squared,
                fit.accepted ? "" : " (fit rejected: r^2 <= 0.99)");
    return 0;
}

int cmd_scaling(const SystemParams& p, const GlobalOptions& g, const std::string& grid_text) {
    Session s("scaling", p, g);
    derived_quantities(p);
    const auto grid = parse_list(grid_text);
    s.option("drive_grid", grid);
    const auto fit = scaling_fit(p, grid, dynamics(g));
    {
        CsvWriter csv(s.path("scaling.csv"), {"F0_over_Fc", "eta", "gamma_t", "r_squared"});
        for (std::size_t i = 0; i < grid.size(); ++i) {
            csv.row({grid[i], fit.etas[i], fit.rates[i].gamma_t, fit.rates[i].r_squared});
        }
    }
    write_json(s.path("scaling.json"), json{{"alpha", fit.alpha},
                                            {"alpha_stderr", fit.alpha_stderr},
                                            {"c0", fit.c0},
                                            {"c1", fit.c1},
                                            {"shifted_bifurcation_ratio", fit.shifted_ratio},
                                            {"linear_c0", fit.linear_c0},
                                            {"linear_c1", fit.linear_c1},
                                            {"linear_c1_stderr", fit.linear_c1_stderr},
                                            {"linear_r_squared", fit.linear_r_squared},
                                            {"linear_runs_test_p", fit.runs_pvalue},
                                            {"converged", fit.converged}});
    s.finish();
    std::printf("scaling: alpha = %.4f +/- %.4f, linear-model runs-test p = %.3f\n", fit.alpha, fit.alpha_stderr,
                fit.runs_pvalue);
    return 0;
}

int cmd_selftest(const SystemParams& p, const GlobalOptions& g) {
    Session s("selftest", p, g);
    const auto checks = run_selftest(p);
    int failed = 0;
    json results = json::array();
    for (const auto& c : checks) {
        std::printf("%s  %s  %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
        results.push_back(json{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        failed += c.passed ? 0 : 1;
    }
    write_json(s.path("selftest.json"), results);
    s.finish();
    std::printf("selftest: %d/%zu checks passed\n", static_cast<int>(checks.size()) - failed, checks.size());
    return failed == 0 ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Open quantum dynamics of a driven Duffing oscillator in the rotating frame"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config, "key = value parameter file (defaults for absent keys)");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--threads", g.threads, "worker threads for sweeps (0: logical cores)")->check(CLI::NonNegativeNumber);
    app.add_flag("--no-counter-rotating", g.no_counter_rotating, "drop the exp(+-2i nu t) dissipator terms");
    app.add_flag("--lindblad", g.lindblad, "use the Lindblad dissipator instead of Redfield");

    auto* spectrum = app.add_subcommand("spectrum", "lab and rotating-frame spectra");
    double b_lo = 0.0, b_hi = 1.2, b_step = 0.005;
    auto* bif = app.add_subcommand("bifurcation", "stationary amplitudes and critical forces");
    bif->add_option("--min", b_lo);
    bif->add_option("--max", b_hi);
    bif->add_option("--step", b_step);

    std::string init = "sas";
    int stride = 200;
    auto* evolve_cmd = app.add_subcommand("evolve", "evolve from an attractor state and record observables");
    evolve_cmd->add_option("--init", init, "sas or las");
    evolve_cmd->add_option("--stride", stride, "integrator steps between recorded samples");

    double s_lo = 0.5, s_hi = 1.1, s_step = 0.03;
    auto* sweep = app.add_subcommand("sweep", "hysteresis sweep from both attractors");
    sweep->add_option("--min", s_lo);
    sweep->add_option("--max", s_hi);
    sweep->add_option("--step", s_step);

    double w_at = -1.0, w_extent = 8.0;
    int w_points = 201;
    auto* wig = app.add_subcommand("wigner", "Wigner function snapshot");
    wig->add_option("--init", init, "sas or las");
    wig->add_option("--time", w_at, "snapshot time in drive periods (default t_final)");
    wig->add_option("--extent", w_extent, "grid half-width in quadrature units");
    wig->add_option("--points", w_points, "grid points per axis");

    auto* rate = app.add_subcommand("rate", "tunneling rate at the configured drive");
    rate->add_option("--stride", stride, "integrator steps between recorded samples");

    std::string grid_text = "0.70,0.71,0.72,0.73,0.74,0.75,0.76,0.765";
    auto* scaling = app.add_subcommand("scaling", "tunneling-rate scaling with drive distance");
    scaling->add_option("--grid", grid_text, "comma-separated F0/F_c values");

    auto* selftest = app.add_subcommand("selftest", "fast property checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        log::init_from_env();
        const SystemParams p = g.config.empty() ? SystemParams{} : load_config(g.config);
        log::debug("configuration:\n" + to_config_string(p));
        if (*spectrum) return cmd_spectrum(p, g);
        if (*bif) return cmd_bifurcation(p, g, b_lo, b_hi, b_step);
        if (*evolve_cmd) return cmd_evolve(p, g, init, stride);
        if (*sweep) return cmd_sweep(p, g, s_lo, s_hi, s_step);
        if (*wig) return cmd_wigner(p, g, init, w_at, w_extent, w_points);
        if (*rate) return cmd_rate(p, g, stride);
        if (*scaling) return cmd_scaling(p, g, grid_text);
        if (*selftest) return cmd_selftest(p, g);
    } catch (const ConfigError& e) {
        log::error(e.what());
        return 1;
    } catch (const PhysicsError& e) {
        log::error(e.what());
        return 2;
    } catch (const std::exception& e) {
        log::error(e.what());
        return 1;
    }
    return 0;
}
