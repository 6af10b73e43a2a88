// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "starmm/algorithms.hpp"
#include "starmm/analysis/cache_sim.hpp"
#include "starmm/analysis/dag.hpp"
#include "starmm/analysis/recurrence.hpp"
#include "starmm/analysis/trace_record.hpp"
#include "starmm/bench.hpp"
#include "starmm/classic.hpp"
#include "starmm/config.hpp"
#include "starmm/error.hpp"
#include "starmm/kernels.hpp"
#include "starmm/matrix.hpp"
#include "starmm/metrics.hpp"
#include "starmm/ops.hpp"
#include "starmm/pool.hpp"
#include "starmm/random.hpp"
#include "starmm/report.hpp"
#include "starmm/runtime.hpp"
#include "starmm/scheduler.hpp"
#include "starmm/semiring.hpp"
#include "starmm/strassen.hpp"
#include "starmm/tile_table.hpp"
#include "starmm/trace.hpp"
