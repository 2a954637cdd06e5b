#pragma once

#include "units.hpp"
#include "error.hpp"
#include "device_physics.hpp"
#include "params_file.hpp"
#include "netlist.hpp"
#include "netlist_io.hpp"
#include "validate.hpp"
#include "cells.hpp"
#include "switch_level.hpp"
#include "simulator.hpp"
#include "measure.hpp"
#include "reference_table.hpp"
#include "harness.hpp"
#include "report.hpp"
