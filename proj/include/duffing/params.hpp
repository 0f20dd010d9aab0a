// params.hpp: Dimensionless parameters and the key = value config format
//
// Units: hbar = Omega = 1 with mass m = aleph, so that m*Omega/hbar = aleph.
// Energies are in hbar*Omega and times in 1/Omega. Forces carry hbar*Omega per length unit.

#pragma once

#include "duffing/errors.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

namespace duffing {

struct SystemParams {
    double aleph{12.0};                          // m*Omega/hbar
    double gamma_tilde{1.0 / 24.0};              // gamma/(m*Omega^2)
    double delta{0.065};                         // 1 - nu/Omega
    double kappa{0.01};                          // friction / Omega
    double beta_omega{14.4};                     // hbar*Omega/(k_B T)
    double omega_cutoff{10.0};                   // Ohmic cutoff / Omega
    double drive_ratio{0.7};                     // F0 / F_c
    int n_trunc{60};                             // Fock basis size
    double dt{2.0 * std::numbers::pi / 200.0};   // step, units of 1/Omega
    double t_final{160.0};                       // drive periods (2*pi/Omega)

    double quality_factor() const { return 1.0 / kappa; }
    double detuning() const { return -2.0 * quality_factor() * delta; }
    double shifted_detuning() const {
        return -2.0 * quality_factor() * (delta - 3.0 * gamma_tilde / aleph);
    }
    double drive_frequency() const { return 1.0 - delta; }
    double x_zpf() const { return std::sqrt(1.0 / (2.0 * aleph)); }
};

struct DerivedParams {
    double Q{};
    double Delta{};
    double Delta_shifted{};
    double n_resonant{};   // n* = aleph*delta/(3*gamma_tilde)
    double n_bound{};      // N_b = aleph/(16*gamma_tilde)
    double n_thermal{};    // Bose occupation at Omega
    double x_zpf{};
};

// Bose function n(omega) = 1/(exp(beta*omega) - 1); beta = inf gives zero temperature.
inline double bose_occupation(double omega, double beta) {
    if (std::isinf(beta)) {
        return omega > 0.0 ? 0.0 : (omega < 0.0 ? -1.0 : std::numeric_limits<double>::infinity());
    }
    return 1.0 / std::expm1(beta * omega);
}

inline void validate(const SystemParams& p) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError("invalid parameters: " + what);
    };
    require(std::isfinite(p.aleph) && p.aleph > 0.0, "aleph must be > 0");
    // gamma_tilde = 0 is admitted as the harmonic limit.
    require(std::isfinite(p.gamma_tilde) && p.gamma_tilde >= 0.0, "gamma_tilde must be >= 0");
    require(p.delta > 0.0 && p.delta < 1.0, "delta must lie in (0, 1)");
    require(std::isfinite(p.kappa) && p.kappa > 0.0, "kappa must be > 0");
    require(p.beta_omega > 0.0, "beta_omega must be > 0");
    require(p.omega_cutoff > 0.0, "omega_cutoff must be > 0");
    require(std::isfinite(p.drive_ratio) && p.drive_ratio >= 0.0, "drive_ratio must be >= 0");
    require(std::isfinite(p.dt) && p.dt > 0.0, "dt must be > 0");
    require(std::isfinite(p.t_final) && p.t_final > 0.0, "t_final must be > 0");
    const double min_trunc = 2.0 * std::ceil(3.0 * p.aleph / 2.0);
    require(p.n_trunc >= 2 && p.n_trunc >= min_trunc,
            "n_trunc must be >= 2*ceil(3*aleph/2) = " + std::to_string(static_cast<long long>(min_trunc)));
    if (p.gamma_tilde > 0.0) {
        require(p.aleph / (16.0 * p.gamma_tilde) >= 4.0,
                "bound-state estimate aleph/(16*gamma_tilde) must be >= 4");
    }
}

inline DerivedParams derived_quantities(const SystemParams& p) {
    validate(p);
    DerivedParams d;
    d.Q = p.quality_factor();
    d.Delta = p.detuning();
    d.Delta_shifted = p.shifted_detuning();
    const double inf = std::numeric_limits<double>::infinity();
    d.n_resonant = p.gamma_tilde > 0.0 ? p.aleph * p.delta / (3.0 * p.gamma_tilde) : inf;
    d.n_bound = p.gamma_tilde > 0.0 ? p.aleph / (16.0 * p.gamma_tilde) : inf;
    d.n_thermal = bose_occupation(1.0, p.beta_omega);
    d.x_zpf = p.x_zpf();
    if (p.gamma_tilde > 0.0 && d.n_resonant >= p.n_trunc / 2.0) {
        throw ConfigError("n_trunc too small to hold the large-amplitude state: n* = " +
                          std::to_string(d.n_resonant) + " >= n_trunc/2");
    }
    return d;
}

// ---------------------------------------------------------------------------
// Config file: UTF-8, one "key = value" per line, '#' starts a comment.

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as a number");
    }
    if (used != value.size()) {
        throw ConfigError("config key '" + key + "': trailing characters in '" + value + "'");
    }
    return out;
}

} // namespace detail

inline SystemParams parse_config(std::istream& in, SystemParams base = {}) {
    std::map<std::string, double*> reals{
        {"aleph", &base.aleph},
        {"gamma_tilde", &base.gamma_tilde},
        {"delta", &base.delta},
        {"kappa", &base.kappa},
        {"beta_omega", &base.beta_omega},
        {"omega_cutoff", &base.omega_cutoff},
        {"drive_ratio", &base.drive_ratio},
        {"dt", &base.dt},
        {"t_final", &base.t_final},
    };
    std::map<std::string, int> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (seen.count(key)) {
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        seen[key] = lineno;
        if (key == "n_trunc") {
            const double v = detail::parse_number(key, value);
            if (v != std::floor(v) || v < 0 || v > 1e7) {
                throw ConfigError("config key 'n_trunc' must be a non-negative integer");
            }
            base.n_trunc = static_cast<int>(v);
        } else if (auto it = reals.find(key); it != reals.end()) {
            *it->second = detail::parse_number(key, value);
        } else {
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    validate(base);
    return base;
}

inline SystemParams load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

// Round-trippable text form of a parameter set.
inline std::string to_config_string(const SystemParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << "aleph = " << p.aleph << '\n'
       << "gamma_tilde = " << p.gamma_tilde << '\n'
       << "delta = " << p.delta << '\n'
       << "kappa = " << p.kappa << '\n'
       << "beta_omega = " << p.beta_omega << '\n'
       << "omega_cutoff = " << p.omega_cutoff << '\n'
       << "drive_ratio = " << p.drive_ratio << '\n'
       << "n_trunc = " << p.n_trunc << '\n'
       << "dt = " << p.dt << '\n'
       << "t_final = " << p.t_final << '\n';
    return os.str();
}

} // namespace duffing
