#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace stclus {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

/// Verbosity comes from TRAJ_LOG ({error, info, debug}); default info.
inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("TRAJ_LOG");
        if (env == nullptr) return LogLevel::Info;
        if (std::strcmp(env, "error") == 0) return LogLevel::Error;
        if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
        return LogLevel::Info;
    }();
    return level;
}

inline void log_error(const std::string& msg) { std::fprintf(stderr, "[error] %s\n", msg.c_str()); }

inline void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) std::fprintf(stderr, "[info] %s\n", msg.c_str());
}

inline void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::Debug) std::fprintf(stderr, "[debug] %s\n", msg.c_str());
}

}  // namespace stclus
