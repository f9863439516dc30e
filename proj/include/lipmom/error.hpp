#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lipmom {

/// Invalid argument value (non-finite input, label outside {-1,1}, bad parameter).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Solver produced a non-finite objective. Carries the trace up to the failure.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, std::vector<double> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}

  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

}  // namespace lipmom
