#pragma once

// Stochastic proximal subgradient descent with long-run oscillation
// diagnostics: problems, schedules, noise models, the iteration engine,
// interpolation / flow comparison, trajectory statistics, and the
// experiment harness.

#include "spgd/builtins.hpp"
#include "spgd/config.hpp"
#include "spgd/constraint.hpp"
#include "spgd/diagnostics.hpp"
#include "spgd/engine.hpp"
#include "spgd/errors.hpp"
#include "spgd/experiment.hpp"
#include "spgd/interpolation.hpp"
#include "spgd/noise.hpp"
#include "spgd/problem.hpp"
#include "spgd/region.hpp"
#include "spgd/rng.hpp"
#include "spgd/schedule.hpp"
#include "spgd/trajectory_io.hpp"
#include "spgd/vec.hpp"
#include "spgd/version.hpp"
