#include "mma/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace mma::log {

namespace {

Level parse_env() {
    const char* env = std::getenv("MMA_LOG");
    if (env == nullptr) return Level::info;
    if (std::strcmp(env, "error") == 0) return Level::error;
    if (std::strcmp(env, "debug") == 0) return Level::debug;
    return Level::info;
}

Level& threshold_ref() {
    static Level level = parse_env();
    return level;
}

const char* tag(Level level) {
    switch (level) {
        case Level::error: return "error";
        case Level::info: return "info";
        case Level::debug: return "debug";
    }
    return "info";
}

}  // namespace

Level threshold() { return threshold_ref(); }

void set_threshold(Level level) { threshold_ref() = level; }

void write(Level level, const std::string& message) {
    if (static_cast<int>(level) > static_cast<int>(threshold_ref())) return;
    std::fprintf(stderr, "[%s] %s\n", tag(level), message.c_str());
}

}  // namespace mma::log
