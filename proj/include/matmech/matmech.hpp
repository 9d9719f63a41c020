#pragma once

#include "matmech/amplitude.hpp"
#include "matmech/ansatz.hpp"
#include "matmech/band_array.hpp"
#include "matmech/classical.hpp"
#include "matmech/energy.hpp"
#include "matmech/errors.hpp"
#include "matmech/frequency_grid.hpp"
#include "matmech/oracle.hpp"
#include "matmech/params.hpp"
#include "matmech/perturbation.hpp"
#include "matmech/recursion.hpp"
