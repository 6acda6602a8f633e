#pragma once

#include "penning/compensation.hpp"
#include "penning/constants.hpp"
#include "penning/coupling.hpp"
#include "penning/decoherence.hpp"
#include "penning/electrostatics.hpp"
#include "penning/errors.hpp"
#include "penning/oscillator_pair.hpp"
#include "penning/physics_core.hpp"
#include "penning/register_sim.hpp"
