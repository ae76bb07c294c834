#pragma once

#include "ecokin/kinetics/convolution.hpp"
#include "ecokin/kinetics/density_field.hpp"
#include "ecokin/kinetics/equilibria.hpp"
#include "ecokin/kinetics/picard.hpp"
#include "ecokin/kinetics/solver.hpp"
