#pragma once

#include "ubve/errors.hpp"
#include "ubve/expression.hpp"
#include "ubve/format.hpp"
#include "ubve/heat.hpp"
#include "ubve/io.hpp"
#include "ubve/laplace.hpp"
#include "ubve/layer_potentials.hpp"
#include "ubve/oracles.hpp"
#include "ubve/quadrature.hpp"
#include "ubve/surface.hpp"
#include "ubve/surface_io.hpp"
#include "ubve/system.hpp"
