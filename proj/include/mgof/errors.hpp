#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace mgof {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The cell function carries no test: its centered projection g has (numerically) zero variance.
class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  // Counts are doubles: the number of compositions overflows 64 bits quickly.
  BudgetExceeded(double count, double budget)
      : Error("enumeration budget exceeded: " + format(count) + " compositions > budget " + format(budget)),
        count_(count),
        budget_(budget) {}

  double count() const noexcept { return count_; }
  double budget() const noexcept { return budget_; }

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
  }

  double count_;
  double budget_;
};

class InsufficientReps : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

}  // namespace mgof
