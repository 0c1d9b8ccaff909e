#pragma once

#include <stdexcept>
#include <string>

namespace zicopula {

//! Bad arguments or option combinations (exit code 1).
class UsageError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! Input data that cannot be used: malformed CSV, negative values,
//! degenerate columns, dimension mismatches (exit code 2).
class DataError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

//! Factorization or optimization breakdown (exit code 3).
class NumericError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace zicopula
