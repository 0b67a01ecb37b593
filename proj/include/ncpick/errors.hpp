#pragma once

#include <stdexcept>
#include <string>

namespace ncpick {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments or violated preconditions (bad dimensions, bad grids, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Operands built over different algebras.
class SpecMismatch : public Error {
 public:
  using Error::Error;
};

/// A resolvent (or any guarded inverse) is numerically singular.
class SingularResolvent : public Error {
 public:
  SingularResolvent(const std::string& what, double sigma_min, double norm)
      : Error(what), sigma_min_(sigma_min), norm_(norm) {}
  double sigma_min() const { return sigma_min_; }
  double norm() const { return norm_; }

 private:
  double sigma_min_;
  double norm_;
};

/// Range of V meets ker(1 - L): the Herglotz data does not come from a
/// function with finite |is f(is)| growth.
class RangeNotPerpendicular : public Error {
 public:
  RangeNotPerpendicular(const std::string& what, double overlap)
      : Error(what), overlap_(overlap) {}
  double overlap() const { return overlap_; }

 private:
  double overlap_;
};

/// The compressed unitary still has spectrum at 1.
class SingularCompression : public Error {
 public:
  using Error::Error;
};

/// Least-squares system too ill-conditioned to trust.
class IllConditioned : public Error {
 public:
  IllConditioned(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

}  // namespace ncpick
