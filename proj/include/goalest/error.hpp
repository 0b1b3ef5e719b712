#pragma once

#include <stdexcept>
#include <string>

namespace goalest {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class MeshError : public Error
{
public:
    using Error::Error;
};

class SpaceError : public Error
{
public:
    using Error::Error;
};

/// Raised when a linear or nonlinear solve fails; carries the residual it reached.
class SolverError : public Error
{
public:
    SolverError(const std::string& what, double achieved_residual)
        : Error(what), residual_(achieved_residual)
    {}

    [[nodiscard]] double residual() const { return residual_; }

private:
    double residual_;
};

} // namespace goalest
