#pragma once

#include "bohm/config.hpp"
#include "bohm/ensemble.hpp"
#include "bohm/errors.hpp"
#include "bohm/io.hpp"
#include "bohm/numerics/complex.hpp"
#include "bohm/numerics/finite_diff.hpp"
#include "bohm/numerics/ode.hpp"
#include "bohm/numerics/quadrature.hpp"
#include "bohm/numerics/random.hpp"
#include "bohm/numerics/roots.hpp"
#include "bohm/numerics/statistics.hpp"
#include "bohm/oracle.hpp"
#include "bohm/planewave_pair.hpp"
#include "bohm/run.hpp"
#include "bohm/spherical_pair.hpp"
