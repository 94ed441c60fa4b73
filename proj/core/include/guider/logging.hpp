#pragma once

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace guider::log {

enum class Level : int { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Level comes from GUIDER_LOG_LEVEL in {error,warn,info,debug}; default warn.
inline Level threshold() {
    static const Level cached = [] {
        const char* env = std::getenv("GUIDER_LOG_LEVEL");
        if (env == nullptr) return Level::Warn;
        if (std::strcmp(env, "error") == 0) return Level::Error;
        if (std::strcmp(env, "warn") == 0) return Level::Warn;
        if (std::strcmp(env, "info") == 0) return Level::Info;
        if (std::strcmp(env, "debug") == 0) return Level::Debug;
        return Level::Warn;
    }();
    return cached;
}

inline void emit(Level level, const char* tag, const char* fmt, va_list args) {
    if (static_cast<int>(level) > static_cast<int>(threshold())) return;
    std::fprintf(stderr, "[%s] ", tag);
    std::vfprintf(stderr, fmt, args);
    std::fputc('\n', stderr);
}

// clang-format off
inline void error(const char* fmt, ...) { va_list a; va_start(a, fmt); emit(Level::Error, "error", fmt, a); va_end(a); }
inline void warn(const char* fmt, ...)  { va_list a; va_start(a, fmt); emit(Level::Warn,  "warn",  fmt, a); va_end(a); }
inline void info(const char* fmt, ...)  { va_list a; va_start(a, fmt); emit(Level::Info,  "info",  fmt, a); va_end(a); }
inline void debug(const char* fmt, ...) { va_list a; va_start(a, fmt); emit(Level::Debug, "debug", fmt, a); va_end(a); }
// clang-format on

} // namespace guider::log
