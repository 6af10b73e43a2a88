// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include "starmm/metrics.hpp"
#include "starmm/pool.hpp"

namespace starmm {

inline nlohmann::json to_json(const PoolStats& s) {
  return {{"allocated_bytes", s.allocated_bytes},
          {"issued_bytes", s.issued_bytes},
          {"high_water_bytes", s.high_water_bytes},
          {"fresh_allocations", s.fresh_allocations},
          {"reuses", s.reuses},
          {"releases", s.releases},
          {"requested_elements", s.requested_elements},
          {"worker_high_water_bytes", s.worker_high_water_bytes}};
}

inline nlohmann::json to_json(const MetricsSnapshot& s) {
  nlohmann::json log = nlohmann::json::array();
  for (const auto& r : s.alloc_log) log.push_back({{"depth", r.depth}, {"elements", r.elements}, {"count", r.count}});
  return {{"depth_max", s.depth_max},
          {"base_max", s.base_max},
          {"base_tasks", s.base_tasks},
          {"tile_entries", s.tile_entries},
          {"pairs", s.pairs},
          {"pair_transitions", s.pair_transitions()},
          {"lazy_temps", s.lazy_temps},
          {"scratch_acquires", s.scratch_acquires},
          {"scratch_releases", s.scratch_releases},
          {"alloc_log", log},
          {"pool", to_json(s.pool)}};
}

}  // namespace starmm
