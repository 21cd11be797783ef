#pragma once

#include "rveplast/lattice.hpp"
#include "rveplast/philox.hpp"
#include "rveplast/randfield.hpp"
#include "rveplast/assembly.hpp"
#include "rveplast/solver.hpp"
#include "rveplast/reference.hpp"
#include "rveplast/driver.hpp"
#include "rveplast/stats.hpp"
