#pragma once

// Umbrella header for the numerical core (no JSON or CLI dependencies).

#include "specdist/operator_core.hpp"
#include "specdist/geometries.hpp"
#include "specdist/states.hpp"
#include "specdist/norm_ball_sdp.hpp"
#include "specdist/distance.hpp"
#include "specdist/oracles.hpp"
#include "specdist/properties.hpp"
#include "specdist/random.hpp"
