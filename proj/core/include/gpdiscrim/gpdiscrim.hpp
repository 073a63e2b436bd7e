#ifndef GPDISCRIM_GPDISCRIM_HPP
#define GPDISCRIM_GPDISCRIM_HPP

// Umbrella header.

#include "gpdiscrim/bessel.hpp"
#include "gpdiscrim/criteria_dist.hpp"
#include "gpdiscrim/criteria_pred.hpp"
#include "gpdiscrim/design_measures.hpp"
#include "gpdiscrim/design_search.hpp"
#include "gpdiscrim/errors.hpp"
#include "gpdiscrim/gp.hpp"
#include "gpdiscrim/io.hpp"
#include "gpdiscrim/kernels.hpp"
#include "gpdiscrim/parallel.hpp"
#include "gpdiscrim/rng.hpp"
#include "gpdiscrim/simulation.hpp"

#endif
