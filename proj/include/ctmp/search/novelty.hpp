#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>

#include "ctmp/fstrips/ground.hpp"

namespace ctmp::search {

/// Integer-valued feature over [0, domain).
struct ValueFeature {
    std::function<int(const fs::State&)> fn;
    int domain = 0;
};

/// Maps a state to its feature atoms: one atom X=x per state variable, two
/// atoms (false/true) per derived feature, and one atom per extra value
/// feature. A derived feature is the truth of a ground action's precondition.
class FeatureMap {
public:
    explicit FeatureMap(const fs::GroundProblem& g, std::vector<int> derived_actions = {},
                        std::vector<ValueFeature> extra = {});

    int size() const { return size_; }
    int variables() const { return static_cast<int>(offset_.size()); }
    /// One atom per variable, derived feature and extra feature, ascending.
    void atoms(const fs::State& s, std::vector<int>& out) const;
    /// Atom id of variable `var` taking value `v`.
    int atom(int var, fs::Value v) const;

private:
    const fs::GroundProblem* g_;
    std::vector<int> derived_;
    std::vector<ValueFeature> extra_;
    std::vector<int> offset_;
    int derived_base_ = 0;
    // Per variable: dense value->position map for symbolic types, or the
    // lower bound of an integer range (bool types use their value).
    std::vector<std::vector<int>> position_;
    std::vector<fs::Value> low_;
    int size_ = 0;
};

/// Novelty of atom sets within partitions keyed by heuristic values. Novelty
/// is 1 if an atom is new in the partition, 2 if a pair is new, and arity+1
/// otherwise; evaluating marks everything seen.
class NoveltyTable {
public:
    NoveltyTable(int n_atoms, int arity);

    int evaluate(std::span<const int> atoms, std::span<const int> key);
    std::size_t partitions() const { return parts_.size(); }

private:
    struct Partition {
        std::vector<bool> singles;
        std::vector<std::uint64_t> pair_bits;   // dense n*n bitset when affordable
        absl::flat_hash_set<std::uint64_t> pair_set;
    };
    Partition& partition(std::span<const int> key);
    bool test_and_set_pair(Partition& p, int a, int b);

    int n_;
    int arity_;
    bool dense_pairs_;
    absl::flat_hash_map<std::vector<int>, Partition> parts_;
};

}  // namespace ctmp::search
