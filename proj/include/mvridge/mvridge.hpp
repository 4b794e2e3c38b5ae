#pragma once

#include "mvridge/analytic.hpp"
#include "mvridge/ellipse.hpp"
#include "mvridge/grid.hpp"
#include "mvridge/io.hpp"
#include "mvridge/moments.hpp"
#include "mvridge/morse.hpp"
#include "mvridge/pipeline.hpp"
#include "mvridge/ridge.hpp"
#include "mvridge/synth.hpp"
#include "mvridge/transform.hpp"
#include "mvridge/types.hpp"
