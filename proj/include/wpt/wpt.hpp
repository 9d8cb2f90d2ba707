#pragma once

#include "wpt/bench.hpp"
#include "wpt/channel.hpp"
#include "wpt/harvester.hpp"
#include "wpt/lp.hpp"
#include "wpt/oracle.hpp"
#include "wpt/qp.hpp"
#include "wpt/rng.hpp"
#include "wpt/solution.hpp"
#include "wpt/solvers.hpp"
#include "wpt/tone_grid.hpp"
#include "wpt/waveform.hpp"
