// Umbrella header for the library modules.
#pragma once

#include "simdyn/error.hpp"
#include "simdyn/function_space.hpp"
#include "simdyn/interval_maps.hpp"
#include "simdyn/parallel.hpp"
#include "simdyn/recurrence.hpp"
#include "simdyn/rng.hpp"
#include "simdyn/spectral.hpp"
#include "simdyn/statistics.hpp"
#include "simdyn/symbolic.hpp"
#include "simdyn/thermodynamics.hpp"
#include "simdyn/transfer.hpp"
#include "simdyn/version.hpp"
