#pragma once

#include "ecokin/conditions.hpp"
#include "ecokin/configuration.hpp"
#include "ecokin/domination.hpp"
#include "ecokin/error.hpp"
#include "ecokin/geometry.hpp"
#include "ecokin/ibm.hpp"
#include "ecokin/kernels.hpp"
#include "ecokin/kinetics.hpp"
#include "ecokin/lebesgue_poisson.hpp"
#include "ecokin/model.hpp"
