#pragma once

#include "dlcsim/analytic.hpp"
#include "dlcsim/devmodel.hpp"
#include "dlcsim/engine.hpp"
#include "dlcsim/errors.hpp"
#include "dlcsim/metrics.hpp"
#include "dlcsim/netlist.hpp"
#include "dlcsim/report.hpp"
#include "dlcsim/si.hpp"
#include "dlcsim/topology.hpp"
#include "dlcsim/variation.hpp"
