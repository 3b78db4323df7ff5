#pragma once

#include <stdexcept>
#include <string>

namespace reload {

/// Invalid inputs: malformed models, domain violations, bad parameters.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// A linear solve or eigenvalue computation broke down.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative routine hit its cap before reaching tolerance.
class convergence_error : public std::runtime_error {
public:
    convergence_error(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// A saddle-point solver failed.
class solver_error : public std::runtime_error {
public:
    explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

/// The LP oracle failed.
class oracle_error : public std::runtime_error {
public:
    explicit oracle_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace reload
