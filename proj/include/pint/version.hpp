#ifndef PINT_VERSION_HPP
#define PINT_VERSION_HPP

namespace pint {

inline constexpr const char* version = "0.1.0";

} // namespace pint

#endif // PINT_VERSION_HPP
