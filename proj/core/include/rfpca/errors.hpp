#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rfpca {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (dimension mismatch, bad grid, asymmetric surface, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Fewer subjects or pairs than an estimator needs.
class InsufficientSample : public Error {
public:
    using Error::Error;
};

/// Sphere data spread beyond the local-convexity radius.
class ConcentrationError : public Error {
public:
    using Error::Error;
};

/// log map evaluated at an antipodal pair.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Eigenvalue ties or vanishing gaps where a formula divides by a gap.
class IllConditioned : public Error {
public:
    using Error::Error;
};

/// Spectrum with no positive mass.
class DegenerateSpectrum : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Iterative solver hit its iteration cap. Carries the last iterate so callers can inspect it.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate, double last_step,
                     std::ptrdiff_t time_index = -1)
        : Error(what), last_iterate_(std::move(last_iterate)), last_step_(last_step),
          time_index_(time_index) {}

    const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
    double last_step() const noexcept { return last_step_; }
    /// Grid index of the failing time point, or -1 when raised outside a trajectory sweep.
    std::ptrdiff_t time_index() const noexcept { return time_index_; }

private:
    Eigen::VectorXd last_iterate_;
    double last_step_;
    std::ptrdiff_t time_index_;
};

}  // namespace rfpca
