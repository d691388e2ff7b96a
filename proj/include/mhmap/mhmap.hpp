#pragma once

#include "mhmap/block_tridiag.hpp"
#include "mhmap/errors.hpp"
#include "mhmap/experiments/config.hpp"
#include "mhmap/experiments/montecarlo.hpp"
#include "mhmap/experiments/scenario.hpp"
#include "mhmap/fast_estimator.hpp"
#include "mhmap/fem/assembly.hpp"
#include "mhmap/fem/interpolation.hpp"
#include "mhmap/fem/mesh.hpp"
#include "mhmap/mh_estimator.hpp"
#include "mhmap/noise.hpp"
#include "mhmap/state_space.hpp"
