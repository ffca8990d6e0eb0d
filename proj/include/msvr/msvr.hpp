#pragma once

#include "msvr/analysis.hpp"
#include "msvr/circuit.hpp"
#include "msvr/control.hpp"
#include "msvr/converter.hpp"
#include "msvr/csv.hpp"
#include "msvr/errors.hpp"
#include "msvr/scenario.hpp"
#include "msvr/simulation.hpp"
#include "msvr/summary.hpp"
#include "msvr/time_series.hpp"
