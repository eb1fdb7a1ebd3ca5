#include "gp_pricer/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace gp_pricer::log {

namespace {

Level parse_level(const char* raw) {
    if (raw == nullptr) {
        return Level::warn;
    }
    const std::string v(raw);
    if (v == "error") return Level::error;
    if (v == "info") return Level::info;
    if (v == "debug") return Level::debug;
    return Level::warn;
}

constexpr std::string_view kNames[] = {"error", "warn", "info", "debug"};

}  // namespace

Level threshold() {
    static const Level level = parse_level(std::getenv("GP_PRICER_LOG"));
    return level;
}

void write(Level level, std::string_view message) {
    if (static_cast<int>(level) > static_cast<int>(threshold())) {
        return;
    }
    static std::mutex mu;
    const std::lock_guard lock(mu);
    std::cerr << "[" << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace gp_pricer::log
