#pragma once

#include "lacuna/bigint.hpp"
#include "lacuna/billiard.hpp"
#include "lacuna/contfrac.hpp"
#include "lacuna/ergosum.hpp"
#include "lacuna/floorsum.hpp"
#include "lacuna/observables.hpp"
#include "lacuna/parallel.hpp"
#include "lacuna/piecewise.hpp"
#include "lacuna/report.hpp"
#include "lacuna/sequences.hpp"
#include "lacuna/stats.hpp"
#include "lacuna/variance.hpp"
