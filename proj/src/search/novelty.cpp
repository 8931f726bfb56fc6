#include "ctmp/search/novelty.hpp"

#include <stdexcept>

namespace ctmp::search {

FeatureMap::FeatureMap(const fs::GroundProblem& g, std::vector<int> derived_actions, std::vector<ValueFeature> extra)
    : g_(&g), derived_(std::move(derived_actions)), extra_(std::move(extra))
{
    const fs::Problem& p = g.problem();
    const std::size_t nconst = p.signature.constant_count();
    for (std::size_t v = 0; v < p.variables().size(); ++v) {
        const fs::TypeDef& t = p.signature.type(p.var_type(static_cast<int>(v)));
        offset_.push_back(size_);
        std::vector<int> pos;
        fs::Value low = 0;
        if (t.kind == fs::TypeKind::Symbolic) {
            pos.assign(nconst, -1);
            for (std::size_t i = 0; i < t.members.size(); ++i)
                pos[static_cast<std::size_t>(t.members[i])] = static_cast<int>(i);
        } else if (t.kind == fs::TypeKind::IntRange) {
            low = t.lo;
        }
        position_.push_back(std::move(pos));
        low_.push_back(low);
        size_ += static_cast<int>(t.size());
    }
    derived_base_ = size_;
    size_ += 2 * static_cast<int>(derived_.size());
    for (const auto& f : extra_)
        size_ += f.domain;
}

int FeatureMap::atom(int var, fs::Value v) const
{
    const auto& pos = position_[static_cast<std::size_t>(var)];
    const int p = pos.empty() ? v - low_[static_cast<std::size_t>(var)] : pos[static_cast<std::size_t>(v)];
    return offset_[static_cast<std::size_t>(var)] + p;
}

void FeatureMap::atoms(const fs::State& s, std::vector<int>& out) const
{
    out.clear();
    for (std::size_t v = 0; v < offset_.size(); ++v)
        out.push_back(atom(static_cast<int>(v), s[v]));
    const fs::Problem& p = g_->problem();
    int base = derived_base_;
    for (int a : derived_) {
        const auto& act = g_->actions()[static_cast<std::size_t>(a)];
        out.push_back(base + (fs::eval_formula(p, s, act.precondition) ? 1 : 0));
        base += 2;
    }
    for (const auto& f : extra_) {
        out.push_back(base + f.fn(s));
        base += f.domain;
    }
}

NoveltyTable::NoveltyTable(int n_atoms, int arity) : n_(n_atoms), arity_(arity)
{
    if (arity < 1 || arity > 2)
        throw std::invalid_argument("novelty arity must be 1 or 2");
    dense_pairs_ = static_cast<std::int64_t>(n_) * n_ <= (std::int64_t{1} << 24);
}

NoveltyTable::Partition& NoveltyTable::partition(std::span<const int> key)
{
    auto [it, inserted] = parts_.try_emplace(std::vector<int>(key.begin(), key.end()));
    if (inserted) {
        it->second.singles.assign(static_cast<std::size_t>(n_), false);
        if (arity_ == 2 && dense_pairs_)
            it->second.pair_bits.assign((static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_) + 63) / 64, 0);
    }
    return it->second;
}

bool NoveltyTable::test_and_set_pair(Partition& p, int a, int b)
{
    if (a > b)
        std::swap(a, b);
    const std::uint64_t idx = static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(n_) + static_cast<std::uint64_t>(b);
    if (dense_pairs_) {
        std::uint64_t& w = p.pair_bits[idx / 64];
        const std::uint64_t bit = std::uint64_t{1} << (idx % 64);
        const bool fresh = !(w & bit);
        w |= bit;
        return fresh;
    }
    return p.pair_set.insert(idx).second;
}

int NoveltyTable::evaluate(std::span<const int> atoms, std::span<const int> key)
{
    Partition& p = partition(key);
    bool new_single = false;
    for (int a : atoms)
        if (!p.singles[static_cast<std::size_t>(a)]) {
            p.singles[static_cast<std::size_t>(a)] = true;
            new_single = true;
        }
    if (arity_ == 1)
        return new_single ? 1 : 2;
    bool new_pair = false;
    for (std::size_t i = 0; i < atoms.size(); ++i)
        for (std::size_t j = i + 1; j < atoms.size(); ++j)
            new_pair |= test_and_set_pair(p, atoms[i], atoms[j]);
    return new_single ? 1 : new_pair ? 2 : 3;
}

}  // namespace ctmp::search
