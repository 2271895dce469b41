#pragma once

#include "msense/aggregation.hpp"
#include "msense/analysis.hpp"
#include "msense/decision.hpp"
#include "msense/errors.hpp"
#include "msense/experiment.hpp"
#include "msense/hierarchy.hpp"
#include "msense/interference.hpp"
#include "msense/occupancy.hpp"
#include "msense/random.hpp"
