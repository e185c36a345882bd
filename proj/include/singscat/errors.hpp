#ifndef SINGSCAT_ERRORS_HPP
#define SINGSCAT_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace singscat {

/// Input outside the mathematical domain of an operation (poles, subcritical
/// coupling, invalid exponents). The CLI maps this to exit code 2.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A numerical procedure did not converge (step budget, root search).
/// The CLI maps this to exit code 3.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, std::vector<std::string> trace = {})
      : std::runtime_error(what), trace_(std::move(trace)) {}

  const std::vector<std::string>& trace() const noexcept { return trace_; }

private:
  std::vector<std::string> trace_;
};

/// Root search for a complex level failed or left its trust region.
class SearchError : public ConvergenceError {
public:
  using ConvergenceError::ConvergenceError;
};

/// Result internally inconsistent with a physical sign law (e.g. negative width
/// for an absorbing branch).
class ConsistencyError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Machine-readable warning attached to values computed outside their
/// comfortable validity range.
struct Warning {
  std::string code;
  std::string message;
};

template <class T>
struct Checked {
  T value;
  std::vector<Warning> warnings;

  bool has_warning(const std::string& code) const {
    for (const auto& w : warnings)
      if (w.code == code) return true;
    return false;
  }
};

}  // namespace singscat

#endif
