#pragma once

#include "pxlab/classifier.hpp"
#include "pxlab/config.hpp"
#include "pxlab/embedding.hpp"
#include "pxlab/energy.hpp"
#include "pxlab/exponent_field.hpp"
#include "pxlab/grid.hpp"
#include "pxlab/modular.hpp"
#include "pxlab/ode.hpp"
#include "pxlab/poincare.hpp"
#include "pxlab/runner.hpp"
#include "pxlab/solver.hpp"
#include "pxlab/spectral.hpp"
#include "pxlab/witness.hpp"
