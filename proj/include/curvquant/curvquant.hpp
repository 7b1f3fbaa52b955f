#pragma once

#include "curvquant/calculus.hpp"
#include "curvquant/diff_operator.hpp"
#include "curvquant/evaluate.hpp"
#include "curvquant/expr.hpp"
#include "curvquant/number.hpp"
#include "curvquant/parse.hpp"
#include "curvquant/quantization.hpp"
#include "curvquant/riemann.hpp"
#include "curvquant/simplify.hpp"
#include "curvquant/spectral.hpp"
#include "curvquant/verification.hpp"
