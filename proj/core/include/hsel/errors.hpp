#pragma once

#include <stdexcept>
#include <string>

namespace hsel {

// Invalid distribution or model parameters (nonpositive scale, |rho| >= 1, ...).
class domain_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Truncation region carries essentially no mass under the parent law.
class degenerate_truncation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested truncated moment does not exist for the given degrees of freedom.
class moment_undefined_error : public domain_error {
 public:
  using domain_error::domain_error;
};

// Likelihood evaluation produced a non-finite value.
class numerical_underflow_error : public std::runtime_error {
 public:
  numerical_underflow_error(const std::string& what, long row)
      : std::runtime_error(what), row_(row) {}
  long row() const { return row_; }

 private:
  long row_;
};

// Probit fit detected (quasi-)complete separation.
class separation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Normal-equation system is singular; message names the offending columns.
class singular_system_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hsel
