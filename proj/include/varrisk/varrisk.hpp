#pragma once

// Scenario-scale toolkit for systemic risk measures on variable-exponent
// spaces: Luxemburg norms, aggregators, simple risk measures, their
// compositions and decompositions, acceptance sets and duality.

#include "certain.hpp"
#include "controls.hpp"
#include "duality.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "parallel.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "simple_risk.hpp"
#include "space.hpp"
#include "systemic.hpp"
