#pragma once

#include "controller.hpp"
#include "experiment.hpp"
#include "models.hpp"
#include "queue.hpp"
#include "random.hpp"
#include "sim.hpp"
#include "types.hpp"
