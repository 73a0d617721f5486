#pragma once

// Umbrella header.
#include "crossmatch/asymptotics.hpp"
#include "crossmatch/density.hpp"
#include "crossmatch/error.hpp"
#include "crossmatch/geometry.hpp"
#include "crossmatch/graphs.hpp"
#include "crossmatch/harness.hpp"
#include "crossmatch/matching.hpp"
#include "crossmatch/nulldist.hpp"
#include "crossmatch/statistic.hpp"
