#pragma once

// Umbrella header for the whole library.

#include "gravnoise/config.hpp"
#include "gravnoise/errors.hpp"
#include "gravnoise/gaussian_engine.hpp"
#include "gravnoise/hybrid_engine.hpp"
#include "gravnoise/kernel.hpp"
#include "gravnoise/models.hpp"
#include "gravnoise/quadrature.hpp"
#include "gravnoise/qubit_engine.hpp"
#include "gravnoise/scanner.hpp"
#include "gravnoise/thresholds.hpp"
#include "gravnoise/units.hpp"
#include "gravnoise/validation.hpp"
#include "gravnoise/version.hpp"
