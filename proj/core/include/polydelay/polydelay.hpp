#pragma once

#include "polydelay/dde_solver.hpp"
#include "polydelay/distributed_dde.hpp"
#include "polydelay/error.hpp"
#include "polydelay/experiment.hpp"
#include "polydelay/models.hpp"
#include "polydelay/quadrature.hpp"
#include "polydelay/transform.hpp"
#include "polydelay/tridiagonal.hpp"
#include "polydelay/weight.hpp"
