// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ternary_stab/control_functions.hpp"
#include "ternary_stab/errors.hpp"
#include "ternary_stab/hyers_iteration.hpp"
#include "ternary_stab/rng.hpp"
#include "ternary_stab/scenario_lab.hpp"
#include "ternary_stab/ternary_core.hpp"
#include "ternary_stab/tolerance.hpp"
#include "ternary_stab/trif_operator.hpp"
#include "ternary_stab/version.hpp"
