#pragma once

#include "dcprox/analysis.hpp"
#include "dcprox/bppa.hpp"
#include "dcprox/config.hpp"
#include "dcprox/dc_problem.hpp"
#include "dcprox/errors.hpp"
#include "dcprox/inertial.hpp"
#include "dcprox/problems.hpp"
#include "dcprox/prox.hpp"
#include "dcprox/rng.hpp"
#include "dcprox/runner.hpp"
#include "dcprox/smooth.hpp"
#include "dcprox/trace.hpp"
#include "dcprox/trace_io.hpp"
#include "dcprox/types.hpp"
