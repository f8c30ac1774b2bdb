#pragma once

#include "fedplan/catalog.hpp"
#include "fedplan/codegen.hpp"
#include "fedplan/cost.hpp"
#include "fedplan/dialect.hpp"
#include "fedplan/errors.hpp"
#include "fedplan/expr.hpp"
#include "fedplan/io.hpp"
#include "fedplan/ir.hpp"
#include "fedplan/money.hpp"
#include "fedplan/plan.hpp"
#include "fedplan/planner.hpp"
#include "fedplan/schema.hpp"
#include "fedplan/simulator.hpp"
#include "fedplan/topology.hpp"
