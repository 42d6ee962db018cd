#pragma once

// Umbrella header for the hybrid squeezed-light / atomic-loop simulator.

#include "combsim/gaussian.hpp"
#include "combsim/fringe.hpp"
#include "combsim/loop.hpp"
#include "combsim/comb.hpp"
#include "combsim/sensitivity.hpp"
#include "combsim/experiment.hpp"
