#pragma once

#include <string>

namespace mma::log {

enum class Level { error = 0, info = 1, debug = 2 };

// Threshold comes from the MMA_LOG environment variable ({error,info,debug},
// default info); read once on first use.
Level threshold();
void set_threshold(Level level);

void write(Level level, const std::string& message);

inline void error(const std::string& m) { write(Level::error, m); }
inline void info(const std::string& m) { write(Level::info, m); }
inline void debug(const std::string& m) { write(Level::debug, m); }

}  // namespace mma::log
