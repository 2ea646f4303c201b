#pragma once

#include "curves.hpp"
#include "errors.hpp"
#include "functionals.hpp"
#include "geometry.hpp"
#include "nelder_mead.hpp"
#include "optimizer.hpp"
#include "quadrature.hpp"
#include "scalar_search.hpp"
#include "version.hpp"
