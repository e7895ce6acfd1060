#pragma once

#include "ktraffic/config.hpp"
#include "ktraffic/control.hpp"
#include "ktraffic/engine.hpp"
#include "ktraffic/errors.hpp"
#include "ktraffic/experiments.hpp"
#include "ktraffic/kernel.hpp"
#include "ktraffic/observables.hpp"
#include "ktraffic/output.hpp"
#include "ktraffic/random.hpp"
