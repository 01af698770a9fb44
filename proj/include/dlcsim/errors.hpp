#pragma once

#include <stdexcept>
#include <string>

namespace dlcsim {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Netlist text could not be parsed; carries the 1-based source line.
class ParseError : public Error {
public:
    ParseError(int line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_ = 0;
};

/// Newton iteration failed to converge after all fallback strategies.
class NonConvergence : public Error {
public:
    NonConvergence(double time_s, std::string worst_node, double residual,
                   const std::string& what)
        : Error(what), time_s_(time_s), worst_node_(std::move(worst_node)),
          residual_(residual) {}
    /// Simulation time of the failed step; negative for DC analysis.
    double time_s() const { return time_s_; }
    const std::string& worst_node() const { return worst_node_; }
    double residual() const { return residual_; }

private:
    double time_s_;
    std::string worst_node_;
    double residual_;
};

/// Transient step size shrank below dt_max/1e6 without convergence.
class StepUnderflow : public Error {
public:
    StepUnderflow(double time_s, double dt)
        : Error("step underflow at t=" + std::to_string(time_s) +
                " s (dt=" + std::to_string(dt) + " s)"),
          time_s_(time_s), dt_(dt) {}
    double time_s() const { return time_s_; }
    double dt() const { return dt_; }

private:
    double time_s_;
    double dt_;
};

/// A waveform never crossed the measurement threshold.
class MissingTransition : public Error {
public:
    using Error::Error;
};

/// The sampled comparator decision never flipped across the input ramp.
class NoDecisionFlip : public Error {
public:
    using Error::Error;
};

/// Latch delay requested for a non-positive initial imbalance.
class DegenerateImbalance : public Error {
public:
    using Error::Error;
};

}  // namespace dlcsim
