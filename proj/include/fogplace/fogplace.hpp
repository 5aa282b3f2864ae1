#pragma once

#include "fogplace/error.hpp"
#include "fogplace/power.hpp"
#include "fogplace/topology.hpp"
#include "fogplace/timing.hpp"
#include "fogplace/energy.hpp"
#include "fogplace/lp.hpp"
#include "fogplace/milp.hpp"
#include "fogplace/placement.hpp"
#include "fogplace/scenarios.hpp"
