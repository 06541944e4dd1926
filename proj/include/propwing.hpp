#pragma once

#include "propwing/cases.hpp"
#include "propwing/config.hpp"
#include "propwing/csv.hpp"
#include "propwing/errors.hpp"
#include "propwing/llt.hpp"
#include "propwing/optimizer.hpp"
#include "propwing/planform.hpp"
#include "propwing/polar.hpp"
#include "propwing/slipstream.hpp"
#include "propwing/svg.hpp"
#include "propwing/units.hpp"
