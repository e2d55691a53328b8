#pragma once

#include "error.hpp"
#include "netlist.hpp"
#include "dag.hpp"
#include "lp_model.hpp"
#include "formulation.hpp"
#include "simplex.hpp"
#include "solver.hpp"
#include "assignment.hpp"
#include "simulator.hpp"
#include "report.hpp"
