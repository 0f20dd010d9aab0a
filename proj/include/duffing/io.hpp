// io.hpp: CSV and JSON output plus the per-run manifest

#pragma once

#include "duffing/errors.hpp"
#include "duffing/params.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace duffing {

inline constexpr const char* kVersion = "1.0.0";

using json = nlohmann::ordered_json;

// Fixed printf formatting keeps files byte-identical across runs.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : path_(path), out_(path, std::ios::binary), width_(header.size()) {
        if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }

    void row(const std::vector<double>& values) {
        if (values.size() != width_) throw std::invalid_argument("CsvWriter: row width differs from header");
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
        out_ << '\n';
    }

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t width_;
};

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

inline json params_to_json(const SystemParams& p) {
    return json{{"aleph", p.aleph},
                {"gamma_tilde", p.gamma_tilde},
                {"delta", p.delta},
                {"kappa", p.kappa},
                {"beta_omega", p.beta_omega},
                {"omega_cutoff", p.omega_cutoff},
                {"drive_ratio", p.drive_ratio},
                {"n_trunc", p.n_trunc},
                {"dt", p.dt},
                {"t_final", p.t_final}};
}

// Everything needed to rerun a subcommand exactly.
struct RunManifest {
    std::string subcommand;
    SystemParams params;
    json options = json::object();
    std::vector<std::string> outputs;
    double wall_clock_seconds{};

    json to_json() const {
        return json{{"subcommand", subcommand},
                    {"version", kVersion},
                    {"config", params_to_json(params)},
                    {"config_text", to_config_string(params)},
                    {"options", options},
                    {"outputs", outputs},
                    {"wall_clock_seconds", wall_clock_seconds}};
    }
};

} // namespace duffing
