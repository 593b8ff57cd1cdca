#pragma once

#include "clustering.hpp"
#include "energy.hpp"
#include "errors.hpp"
#include "frame.hpp"
#include "geometry.hpp"
#include "mac.hpp"
#include "metrics.hpp"
#include "mobility.hpp"
#include "network.hpp"
#include "radio.hpp"
#include "routing.hpp"
#include "scenario.hpp"
#include "sim_core.hpp"
#include "sweep.hpp"
