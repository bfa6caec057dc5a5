#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace slideflow::cli {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

// Threshold comes from SLIDEFLOW_LOG (debug|info|warn|error|off), default info.
// Unrecognized values fall back to info rather than failing the run.
inline LogLevel log_threshold() {
    static LogLevel level = [] {
        const char* env = std::getenv("SLIDEFLOW_LOG");
        if (!env) return LogLevel::info;
        std::string s(env);
        if (s == "debug") return LogLevel::debug;
        if (s == "info") return LogLevel::info;
        if (s == "warn") return LogLevel::warn;
        if (s == "error") return LogLevel::error;
        if (s == "off") return LogLevel::off;
        return LogLevel::info;
    }();
    return level;
}

// Logs go to stderr so primary outputs (stdout, files) stay clean.
inline void log_line(LogLevel level, const std::string& msg) {
    if (level < log_threshold()) return;
    static const char* tags[] = {"debug", "info", "warn", "error"};
    std::cerr << "[" << tags[static_cast<int>(level)] << "] " << msg << "\n";
}

inline void log_debug(const std::string& m) { log_line(LogLevel::debug, m); }
inline void log_info(const std::string& m) { log_line(LogLevel::info, m); }
inline void log_warn(const std::string& m) { log_line(LogLevel::warn, m); }
inline void log_error(const std::string& m) { log_line(LogLevel::error, m); }

}  // namespace slideflow::cli
