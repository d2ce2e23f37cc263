#pragma once

#include "mosaic/errors.hpp"
#include "mosaic/pose.hpp"
#include "mosaic/geometry.hpp"
#include "mosaic/rng.hpp"
#include "mosaic/world.hpp"
#include "mosaic/skills.hpp"
#include "mosaic/graph.hpp"
#include "mosaic/oracle.hpp"
#include "mosaic/planner.hpp"
#include "mosaic/baselines.hpp"
#include "mosaic/scenarios.hpp"
#include "mosaic/scenario_io.hpp"
#include "mosaic/snapshot.hpp"
#include "mosaic/svg.hpp"
#include "mosaic/bench.hpp"
