#pragma once

#include "d2d/errors.hpp"
#include "d2d/special_functions.hpp"
#include "d2d/quadrature.hpp"
#include "d2d/model.hpp"
#include "d2d/analytical.hpp"
#include "d2d/parallel.hpp"
#include "d2d/montecarlo.hpp"
#include "d2d/config.hpp"
#include "d2d/sweep.hpp"
#include "d2d/validation.hpp"
