#ifndef PLQFPI_PLQFPI_HPP
#define PLQFPI_PLQFPI_HPP

#include "plqfpi/error.hpp"
#include "plqfpi/linalg.hpp"
#include "plqfpi/projection.hpp"
#include "plqfpi/prox.hpp"
#include "plqfpi/operators.hpp"
#include "plqfpi/fixed_set.hpp"
#include "plqfpi/fpi.hpp"
#include "plqfpi/pwl.hpp"
#include "plqfpi/rates.hpp"
#include "plqfpi/problems.hpp"
#include "plqfpi/experiment.hpp"

#endif // PLQFPI_PLQFPI_HPP
