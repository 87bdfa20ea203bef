#pragma once

#include <stdexcept>
#include <string>

namespace stokeswave {

// Base class for all solver failures. Precondition violations and solver
// breakdowns are kept as distinct types so callers (and the CLI exit codes)
// can tell them apart.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Preconditions
class DepthViolation : public Error {
  public:
    explicit DepthViolation(const std::string& msg) : Error(msg) {}
};
class DepthPreconditionViolated : public Error {
  public:
    explicit DepthPreconditionViolated(const std::string& msg) : Error(msg) {}
};
class CompatibilityViolation : public Error {
  public:
    explicit CompatibilityViolation(const std::string& msg) : Error(msg) {}
};
class NonZeroMean : public Error {
  public:
    explicit NonZeroMean(const std::string& msg) : Error(msg) {}
};
class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Solver failures
class JacobianDegenerate : public Error {
  public:
    explicit JacobianDegenerate(const std::string& msg) : Error(msg) {}
};
class SingularSystem : public Error {
  public:
    explicit SingularSystem(const std::string& msg) : Error(msg) {}
};
class ResidualTooLarge : public Error {
  public:
    explicit ResidualTooLarge(const std::string& msg) : Error(msg) {}
};
class NoContraction : public Error {
  public:
    explicit NoContraction(const std::string& msg) : Error(msg) {}
};
class NewtonDiverged : public Error {
  public:
    explicit NewtonDiverged(const std::string& msg) : Error(msg) {}
};
class MaxIterExceeded : public Error {
  public:
    explicit MaxIterExceeded(const std::string& msg) : Error(msg) {}
};
class StepRejected : public Error {
  public:
    explicit StepRejected(const std::string& msg) : Error(msg) {}
};

}  // namespace stokeswave
