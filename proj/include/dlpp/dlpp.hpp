#pragma once

#include "dlpp/clamp.hpp"
#include "dlpp/config.hpp"
#include "dlpp/core.hpp"
#include "dlpp/couplings.hpp"
#include "dlpp/distributions.hpp"
#include "dlpp/estimators.hpp"
#include "dlpp/field.hpp"
#include "dlpp/lattice.hpp"
#include "dlpp/passage.hpp"
#include "dlpp/report.hpp"
#include "dlpp/rng.hpp"
#include "dlpp/runner.hpp"
#include "dlpp/scenarios.hpp"
#include "dlpp/stats.hpp"
