#pragma once

#include "sens2/benchmarks.hpp"
#include "sens2/driver.hpp"
#include "sens2/engine.hpp"
#include "sens2/errors.hpp"
#include "sens2/first_order.hpp"
#include "sens2/ledger.hpp"
#include "sens2/linear_solver.hpp"
#include "sens2/model.hpp"
#include "sens2/newton.hpp"
#include "sens2/second_order.hpp"
#include "sens2/verification.hpp"
