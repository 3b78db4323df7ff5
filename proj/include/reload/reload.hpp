#pragma once

#include "reload/bench.hpp"
#include "reload/cmdp.hpp"
#include "reload/envs.hpp"
#include "reload/errors.hpp"
#include "reload/games.hpp"
#include "reload/geometry.hpp"
#include "reload/linalg.hpp"
#include "reload/metrics.hpp"
#include "reload/oracle.hpp"
#include "reload/projection.hpp"
#include "reload/rng.hpp"
#include "reload/simplex.hpp"
#include "reload/solvers.hpp"
