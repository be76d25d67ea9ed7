#pragma once

// Umbrella header for the whole library.

#include "arms/arms_ref.hpp"
#include "arms/config.hpp"
#include "arms/errors.hpp"
#include "arms/events_io.hpp"
#include "arms/farms.hpp"
#include "arms/fixed_point.hpp"
#include "arms/harms.hpp"
#include "arms/local_flow.hpp"
#include "arms/metrics.hpp"
#include "arms/pipeline.hpp"
#include "arms/types.hpp"
