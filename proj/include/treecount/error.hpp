#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace treecount {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed edge-list input. `line()` is 1-based; 0 means "whole document".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DisconnectedGraphError : public Error {
 public:
  DisconnectedGraphError() : Error("graph is disconnected") {}
  explicit DisconnectedGraphError(const std::string& context)
      : Error("graph is disconnected (" + context + ")") {}
};

/// A caller-side contract violation (bad argument, violated hypothesis).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The Laplacian solver hit its iteration cap before reaching tolerance.
class SolveError : public Error {
 public:
  SolveError(double achieved, double target, std::size_t iterations)
      : Error("laplacian solve did not converge: relative residual " + std::to_string(achieved) +
              " > " + std::to_string(target) + " after " + std::to_string(iterations) +
              " iterations"),
        achieved_(achieved),
        target_(target),
        iterations_(iterations) {}

  double achieved_residual() const noexcept { return achieved_; }
  double target_residual() const noexcept { return target_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double achieved_;
  double target_;
  std::size_t iterations_;
};

/// GetUncorrelated resampled F+ more often than its retry cap allows.
class RetryLimitError : public Error {
 public:
  RetryLimitError(std::size_t attempts, std::size_t survivors, std::size_t wanted)
      : Error("uncorrelated subset search gave up after " + std::to_string(attempts) +
              " attempts (best attempt kept " + std::to_string(survivors) + " of " +
              std::to_string(wanted) + " edges)"),
        attempts_(attempts) {}

  std::size_t attempts() const noexcept { return attempts_; }

 private:
  std::size_t attempts_;
};

/// A run exceeded its configured wall-clock budget.
class BudgetExceededError : public Error {
 public:
  BudgetExceededError(double seconds, std::size_t iterations, std::size_t edges_left)
      : Error("time budget of " + std::to_string(seconds) + " s exceeded after " +
              std::to_string(iterations) + " iterations (" + std::to_string(edges_left) +
              " edges left)"),
        iterations_(iterations),
        edges_left_(edges_left) {}

  std::size_t iterations() const noexcept { return iterations_; }
  std::size_t edges_left() const noexcept { return edges_left_; }

 private:
  std::size_t iterations_;
  std::size_t edges_left_;
};

}  // namespace treecount
