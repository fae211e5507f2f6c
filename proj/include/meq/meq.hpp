#pragma once

// Umbrella header for the meq solver suite.

#include "meq/bounds.hpp"
#include "meq/cg.hpp"
#include "meq/dense.hpp"
#include "meq/experiment.hpp"
#include "meq/galerkin.hpp"
#include "meq/generators.hpp"
#include "meq/krylov.hpp"
#include "meq/matrix_market.hpp"
#include "meq/minres.hpp"
#include "meq/operator.hpp"
#include "meq/solution.hpp"
