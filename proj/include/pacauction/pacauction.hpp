#pragma once

#include "pacauction/errors.hpp"
#include "pacauction/game_harness.hpp"
#include "pacauction/mda_sim.hpp"
#include "pacauction/mechanism.hpp"
#include "pacauction/models.hpp"
#include "pacauction/pac_core.hpp"
#include "pacauction/plan_opt.hpp"
#include "pacauction/rng.hpp"
#include "pacauction/stats.hpp"
