#pragma once

#include "nnmarket/market.hpp"
#include "nnmarket/stage_game.hpp"
#include "nnmarket/equilibrium.hpp"
#include "nnmarket/grid_oracle.hpp"
#include "nnmarket/sweep.hpp"
#include "nnmarket/emit.hpp"
