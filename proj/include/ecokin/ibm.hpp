#pragma once

#include "ecokin/ibm/cell_list.hpp"
#include "ecokin/ibm/scaling.hpp"
#include "ecokin/ibm/simulator.hpp"
#include "ecokin/ibm/statistics.hpp"
