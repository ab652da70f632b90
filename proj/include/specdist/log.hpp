#ifndef SPECDIST_LOG_HPP
#define SPECDIST_LOG_HPP

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace specdist::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

/// Verbosity comes from SPECDIST_LOG (error|warn|info|debug); default warn.
inline Level threshold() {
    static const Level level = [] {
        const char* env = std::getenv("SPECDIST_LOG");
        const std::string_view v = env ? env : "";
        if (v == "error" || v == "quiet")
            return Level::error;
        if (v == "info")
            return Level::info;
        if (v == "debug")
            return Level::debug;
        return Level::warn;
    }();
    return level;
}

inline void write(Level level, std::string_view msg) {
    if (level > threshold())
        return;
    static std::mutex mu;
    static constexpr std::string_view names[] = {"error", "warn", "info", "debug"};
    const std::lock_guard lock(mu);
    std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

inline void warn(std::string_view msg) { write(Level::warn, msg); }
inline void info(std::string_view msg) { write(Level::info, msg); }
inline void debug(std::string_view msg) { write(Level::debug, msg); }

} // namespace specdist::log

#endif // SPECDIST_LOG_HPP
