#pragma once

#include "budget.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "control.hpp"
#include "detection.hpp"
#include "noise_spectrum.hpp"
#include "opo.hpp"
#include "sideband_core.hpp"
#include "table.hpp"
