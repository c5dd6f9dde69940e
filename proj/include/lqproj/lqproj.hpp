#pragma once

// Umbrella header: pulls in the whole library.

#include "lqproj/alternating.hpp"
#include "lqproj/errors.hpp"
#include "lqproj/examples.hpp"
#include "lqproj/experiment.hpp"
#include "lqproj/newton.hpp"
#include "lqproj/oracle.hpp"
#include "lqproj/projection.hpp"
#include "lqproj/regularity.hpp"
#include "lqproj/space.hpp"
#include "lqproj/subspace.hpp"
