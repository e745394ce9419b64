#pragma once

// Umbrella header.

#include "randsub/errors.hpp"
#include "randsub/rng.hpp"
#include "randsub/graph.hpp"
#include "randsub/capacity.hpp"
#include "randsub/measures.hpp"
#include "randsub/thresholds.hpp"
#include "randsub/ramsey.hpp"
#include "randsub/io.hpp"
