#pragma once

#include <cstdint>

#include "ctmp/compile/instance.hpp"
#include "ctmp/precompile/tables.hpp"

namespace ctmp::cmp {

struct GenOptions {
    int objects = 10;
    int goals = 1;
    std::uint64_t seed = 1;
    int initial_base = 0;
    /// Redraw until passes_clearance_check holds, at most `attempts` times.
    bool require_clearance = true;
    int attempts = 200;
};

/// Real configs graspable from some base connected to `base`.
std::vector<int> reachable_configs(const pre::Tables& t, int base);

/// One draw: objects go to distinct reachable configs at least one object
/// diameter apart, uniformly at random; the first `goals` objects get goal
/// configs drawn the same way among the configs left free.
Instance generate_once(const pre::Tables& t, const GenOptions& opt, geo::SplitMix& rng);

/// Cheap filter against dead instances. Objects are removed one at a time
/// while some object left has an approach clear of the others (holding and
/// not holding). Passes when every goal object gets removed and every goal
/// config has a clear approach past the objects that never could be.
bool passes_clearance_check(const pre::Tables& t, const Instance& inst);

/// Draws with generate_once until the clearance check passes (if required).
Instance generate_instance(const pre::Tables& t, const GenOptions& opt);

}  // namespace ctmp::cmp
