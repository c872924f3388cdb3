#pragma once

#include <stdexcept>
#include <string>

namespace coalesce
{
/// Input outside the mathematical domain of an operation.
class DomainError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

/// Invalid or inconsistent run/species configuration.
class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Iterative field solve did not reach its tolerance.
class SolverError : public std::runtime_error
{
  public:
    SolverError(std::string const& what, int iterations, double residual)
        : std::runtime_error(what), iterations_(iterations), residual_(residual)
    {
    }

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

  private:
    int iterations_;
    double residual_;
};

/// Particle advancement produced a non-finite state.
class StepError : public std::runtime_error
{
  public:
    StepError(std::string const& what, unsigned long long particle_id)
        : std::runtime_error(what), particle_id_(particle_id)
    {
    }

    unsigned long long particle_id() const noexcept { return particle_id_; }

  private:
    unsigned long long particle_id_;
};

/// File could not be read or written.
class IoError : public std::runtime_error
{
  public:
    IoError(std::string const& what, std::string path)
        : std::runtime_error(what + ": " + path), path_(std::move(path))
    {
    }

    std::string const& path() const noexcept { return path_; }

  private:
    std::string path_;
};
}  // namespace coalesce
