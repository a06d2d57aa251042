#pragma once

#include <exception>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ctree {

// Error categories map one-to-one onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept = 0;
};

/// Caller violated a precondition (bad argument, out-of-range id, infeasible split).
class UsageError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

/// Input data is malformed (size mismatch, non-finite values, inconsistent blocks).
class DataError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// An internal invariant failed; indicates a bug rather than bad input.
class InternalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

/// Rethrows `e` with `tag: ` prefixed to its message, keeping the category.
/// Exceptions from outside the library become internal errors.
[[noreturn]] inline void rethrow_tagged(std::exception_ptr e, std::string_view tag) {
  const std::string prefix = std::string(tag) + ": ";
  try {
    std::rethrow_exception(e);
  } catch (const UsageError& x) {
    throw UsageError(prefix + x.what());
  } catch (const DataError& x) {
    throw DataError(prefix + x.what());
  } catch (const InternalError& x) {
    throw InternalError(prefix + x.what());
  } catch (const std::bad_alloc&) {
    throw;
  } catch (const std::exception& x) {
    throw InternalError(prefix + x.what());
  }
}

}  // namespace ctree
