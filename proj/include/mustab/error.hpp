#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mustab {

/// Base of every library error. Input problems derive from this; logic
/// errors (broken internal invariants) use std::logic_error instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MismatchedSpace : public Error {
 public:
  using Error::Error;
};

class NotBijective : public Error {
 public:
  NotBijective() : Error("NotBijective: map is not a bijection") {}
};

class NotAbsolutelyContinuous : public Error {
 public:
  explicit NotAbsolutelyContinuous(std::size_t witness)
      : Error("NotAbsolutelyContinuous: witness point " + std::to_string(witness)),
        witness_(witness) {}
  std::size_t witness() const noexcept { return witness_; }

 private:
  std::size_t witness_;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class InvalidMeasure : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(std::uint64_t count)
      : Error("BudgetExceeded(" + std::to_string(count) + ")"), count_(count) {}
  std::uint64_t count() const noexcept { return count_; }

 private:
  std::uint64_t count_;
};

}  // namespace mustab
