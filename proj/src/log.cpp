#include "thermoflex/log.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace thermoflex::log {

namespace {

Level parse_env() {
    const char* v = std::getenv("THERMOFLEX_LOG");
    if (v == nullptr) return Level::warn;
    if (std::strcmp(v, "error") == 0) return Level::error;
    if (std::strcmp(v, "warn") == 0) return Level::warn;
    if (std::strcmp(v, "info") == 0) return Level::info;
    if (std::strcmp(v, "debug") == 0) return Level::debug;
    return Level::warn;
}

const char* tag(Level lvl) {
    switch (lvl) {
        case Level::error: return "error";
        case Level::warn: return "warn";
        case Level::info: return "info";
        case Level::debug: return "debug";
    }
    return "?";
}

}  // namespace

Level threshold() {
    static const Level lvl = parse_env();
    return lvl;
}

bool enabled(Level lvl) {
    return static_cast<int>(lvl) <= static_cast<int>(threshold());
}

void write(Level lvl, const char* fmt, ...) {
    if (!enabled(lvl)) return;
    std::fprintf(stderr, "[%s] ", tag(lvl));
    va_list args;
    va_start(args, fmt);
    std::vfprintf(stderr, fmt, args);
    va_end(args);
    std::fputc('\n', stderr);
}

}  // namespace thermoflex::log
