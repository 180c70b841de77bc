#pragma once

// Convenience umbrella for the whole library.

#include "qtomo/circuit.hpp"
#include "qtomo/errors.hpp"
#include "qtomo/experiment.hpp"
#include "qtomo/gates.hpp"
#include "qtomo/hamming.hpp"
#include "qtomo/presets.hpp"
#include "qtomo/process.hpp"
#include "qtomo/rng.hpp"
#include "qtomo/sim.hpp"
#include "qtomo/state.hpp"
#include "qtomo/tomo.hpp"
