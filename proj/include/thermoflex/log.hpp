#pragma once

namespace thermoflex::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Threshold parsed once from THERMOFLEX_LOG (error|warn|info|debug), default warn.
Level threshold();

bool enabled(Level lvl);

// printf-style message to stderr, prefixed with the level tag.
void write(Level lvl, const char* fmt, ...);

}  // namespace thermoflex::log
