#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace sel {

// Every failure the library raises derives from Error; kind() is the stable
// machine-readable tag the CLI puts in its JSON error payload.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

class DomainError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "domain_error"; }
};

class ResolutionError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "resolution_error"; }
};

class ContractViolation : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "contract_violation"; }
};

class PreconditionError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "precondition_error"; }
};

class RangeError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "range_error"; }
};

class LayerError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "layer_error"; }
};

class Infeasible : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "infeasible"; }
};

class UnsupportedRegime : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "unsupported_regime"; }
};

class ShootingError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "shooting_error"; }
};

// Solver failures keep the last iterate so callers can inspect or persist it.
class SolverError : public Error {
public:
    SolverError(const std::string& what, Eigen::VectorXd last)
        : Error(what), last_iterate(std::move(last)) {}
    const char* kind() const noexcept override { return "solver_error"; }
    Eigen::VectorXd last_iterate;
};

class ConvergenceError : public SolverError {
public:
    using SolverError::SolverError;
    const char* kind() const noexcept override { return "convergence_error"; }
};

class PositivityBreach : public SolverError {
public:
    PositivityBreach(const std::string& what, Eigen::VectorXd last, int node_)
        : SolverError(what, std::move(last)), node(node_) {}
    const char* kind() const noexcept override { return "positivity_breach"; }
    int node;
};

// The discrete solve finished but its source mass sits in the boundary-most
// decade of delta, so the answer is an artifact of where the grid stops.
class DivergenceError : public SolverError {
public:
    DivergenceError(const std::string& what, Eigen::VectorXd last, double share)
        : SolverError(what, std::move(last)), tail_share(share) {}
    const char* kind() const noexcept override { return "divergence"; }
    double tail_share;
};

}  // namespace sel
