#pragma once

#include "prafd/ao_solver.hpp"
#include "prafd/baselines.hpp"
#include "prafd/beamformer.hpp"
#include "prafd/channel.hpp"
#include "prafd/config.hpp"
#include "prafd/error.hpp"
#include "prafd/experiment.hpp"
#include "prafd/fp_objective.hpp"
#include "prafd/geometry.hpp"
#include "prafd/placement.hpp"
#include "prafd/rng.hpp"
