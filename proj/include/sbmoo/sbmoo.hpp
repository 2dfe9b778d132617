#pragma once

#include "sbmoo/audit.hpp"
#include "sbmoo/detection.hpp"
#include "sbmoo/errors.hpp"
#include "sbmoo/harness.hpp"
#include "sbmoo/optimisers.hpp"
#include "sbmoo/pareto.hpp"
#include "sbmoo/points.hpp"
#include "sbmoo/problems.hpp"
#include "sbmoo/reporting.hpp"
#include "sbmoo/rng.hpp"
#include "sbmoo/stats.hpp"
#include "sbmoo/trace_io.hpp"
