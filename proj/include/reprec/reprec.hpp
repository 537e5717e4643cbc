#pragma once

// Umbrella header for the reprec simulation toolkit: reconfigurable
// MMSE+waterfilling precoding for K-user MIMO interference networks, the
// myopic variant, the Max-SINR baseline, and the Monte Carlo sweep harness.

#include "reprec/algorithms.hpp"
#include "reprec/channel.hpp"
#include "reprec/core.hpp"
#include "reprec/network.hpp"
#include "reprec/numerics.hpp"
#include "reprec/report.hpp"
#include "reprec/scenario.hpp"
#include "reprec/sweep.hpp"
