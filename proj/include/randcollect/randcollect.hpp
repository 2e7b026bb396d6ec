#pragma once

// Umbrella header for the whole library: random-walk data collection on
// graphs, its steady-state rate analysis, throughput/latency bounds, and the
// slot-synchronous Monte Carlo engine that cross-checks them.

#include "randcollect/bounds.hpp"
#include "randcollect/common.hpp"
#include "randcollect/experiment.hpp"
#include "randcollect/graph.hpp"
#include "randcollect/linalg.hpp"
#include "randcollect/rng.hpp"
#include "randcollect/simulator.hpp"
#include "randcollect/steady_state.hpp"
#include "randcollect/walk.hpp"
