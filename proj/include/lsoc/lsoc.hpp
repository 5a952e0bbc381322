#pragma once

#include "lsoc/errors.hpp"
#include "lsoc/problem.hpp"
#include "lsoc/problem_io.hpp"
#include "lsoc/numerics.hpp"
#include "lsoc/hjb.hpp"
#include "lsoc/ode.hpp"
#include "lsoc/ergodic.hpp"
#include "lsoc/simulate.hpp"
