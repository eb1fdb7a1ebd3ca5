#pragma once

#include <chrono>

namespace gp_pricer {

/// Wall-clock seconds spent per phase: hyperparameter search and GP fitting,
/// planning (transition model, value iteration, acquisition), acting in the
/// environment.
struct PhaseTimes {
    double fit = 0.0;
    double plan = 0.0;
    double act = 0.0;

    double total() const noexcept { return fit + plan + act; }

    PhaseTimes& operator+=(const PhaseTimes& o) noexcept {
        fit += o.fit;
        plan += o.plan;
        act += o.act;
        return *this;
    }
};

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}

    /// Seconds since construction or the previous lap().
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - start_).count();
        start_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace gp_pricer
