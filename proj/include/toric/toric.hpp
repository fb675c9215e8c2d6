#pragma once

#include "toric/version.hpp"

#include "toric/exact.hpp"
#include "toric/numerics.hpp"
#include "toric/parallel.hpp"
#include "toric/polynomial.hpp"
#include "toric/polytope.hpp"

#include "toric/quadrature.hpp"

#include "toric/kernel.hpp"

#include "toric/asymptotics.hpp"
#include "toric/euler_maclaurin.hpp"
#include "toric/measures.hpp"

#include "toric/io.hpp"
