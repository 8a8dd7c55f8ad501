#pragma once

// Umbrella header: the whole library.

#include "serex/core/errors.hpp"
#include "serex/core/geometry.hpp"
#include "serex/core/knn.hpp"
#include "serex/core/types.hpp"
#include "serex/core/voxel.hpp"
#include "serex/frontier/frontier_graph.hpp"
#include "serex/graph/keyframe_graph.hpp"
#include "serex/graph/shortest_path.hpp"
#include "serex/harness/episode.hpp"
#include "serex/harness/metrics.hpp"
#include "serex/harness/report.hpp"
#include "serex/harness/scenario.hpp"
#include "serex/planner/planner.hpp"
#include "serex/ser/ser.hpp"
#include "serex/sim/environment.hpp"
#include "serex/sim/robot.hpp"
#include "serex/sim/sensor.hpp"
