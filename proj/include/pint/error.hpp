#ifndef PINT_ERROR_HPP
#define PINT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace pint {

/// Base of every error thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Operand lengths, layouts or times do not agree.
class ShapeMismatch : public Error
{
public:
  using Error::Error;
};

/// NaN/Inf encountered, or a singular linearization / zero pivot.
class NumericBreakdown : public Error
{
public:
  using Error::Error;
};

class MaxItersExceeded : public Error
{
public:
  using Error::Error;
};

/// A propagation window is not an integer multiple of the step size.
class NonDivisibleWindow : public Error
{
public:
  using Error::Error;
};

/// The ALE interval collapsed (|u| >= 0.9 L0).
class MeshDegenerate : public Error
{
public:
  using Error::Error;
};

class InvalidArgument : public Error
{
public:
  using Error::Error;
};

} // namespace pint

#endif // PINT_ERROR_HPP
