#pragma once

#include "config.hpp"
#include "dynamics.hpp"
#include "evolve.hpp"
#include "grid.hpp"
#include "integrate.hpp"
#include "linalg.hpp"
#include "norms.hpp"
#include "params.hpp"
#include "runner.hpp"
#include "verify.hpp"
