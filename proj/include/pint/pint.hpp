#ifndef PINT_PINT_HPP
#define PINT_PINT_HPP

#include "pint/error.hpp"
#include "pint/integrators.hpp"
#include "pint/linalg.hpp"
#include "pint/parareal.hpp"
#include "pint/problems.hpp"
#include "pint/state.hpp"
#include "pint/version.hpp"

#endif // PINT_PINT_HPP
