// SPDX-License-Identifier: MIT
//
// rmtlab.hpp -- umbrella header.

#pragma once

#include "common.hpp"
#include "graph.hpp"
#include "harness.hpp"
#include "localtree.hpp"
#include "nonbacktracking.hpp"
#include "operators.hpp"
#include "predict.hpp"
#include "pruning.hpp"
#include "rng.hpp"
#include "solvers.hpp"
#include "spectrum.hpp"
#include "theory.hpp"
