#pragma once

#include "hsahop/actuator.hpp"
#include "hsahop/braking.hpp"
#include "hsahop/config.hpp"
#include "hsahop/controller.hpp"
#include "hsahop/energetics.hpp"
#include "hsahop/errors.hpp"
#include "hsahop/experiments.hpp"
#include "hsahop/hopper_sim.hpp"
#include "hsahop/hsa_model.hpp"
#include "hsahop/leg_kinematics.hpp"
#include "hsahop/sizing.hpp"
#include "hsahop/spear.hpp"
#include "hsahop/state.hpp"
#include "hsahop/statistics.hpp"
