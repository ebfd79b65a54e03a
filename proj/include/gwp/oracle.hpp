#pragma once

#include "gwp/oracle/fit.hpp"
#include "gwp/oracle/fock.hpp"
#include "gwp/oracle/grid.hpp"
