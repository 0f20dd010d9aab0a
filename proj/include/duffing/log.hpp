// log.hpp: Leveled stderr logging controlled by DUFFING_LOG_LEVEL

#pragma once

#include "duffing/errors.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace duffing::log {

enum class Level { error = 0, info = 1, debug = 2 };

inline Level parse_level(std::string_view s) {
    if (s == "error") return Level::error;
    if (s == "info") return Level::info;
    if (s == "debug") return Level::debug;
    throw ConfigError("DUFFING_LOG_LEVEL must be one of error, info, debug (got '" + std::string(s) + "')");
}

inline Level& threshold() {
    static Level level = Level::info;
    return level;
}

// Reads DUFFING_LOG_LEVEL; unset means info.
inline void init_from_env() {
    if (const char* v = std::getenv("DUFFING_LOG_LEVEL"); v != nullptr && *v != '\0') threshold() = parse_level(v);
}

inline bool enabled(Level l) { return static_cast<int>(l) <= static_cast<int>(threshold()); }

inline void write(Level l, std::string_view msg) {
    if (!enabled(l)) return;
    static std::mutex mu;
    static constexpr const char* tags[] = {"error", "info", "debug"};
    std::lock_guard lock(mu);
    std::cerr << '[' << tags[static_cast<int>(l)] << "] " << msg << '\n';
}

inline void error(std::string_view msg) { write(Level::error, msg); }
inline void info(std::string_view msg) { write(Level::info, msg); }
inline void debug(std::string_view msg) { write(Level::debug, msg); }

} // namespace duffing::log
