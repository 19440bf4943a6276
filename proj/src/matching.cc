#include <wsp/matching.hh>

#include <algorithm>
#include <bit>
#include <cstring>

using std::int32_t;
using std::uint64_t;
using std::vector;

namespace wsp
{
    auto candidate_users(const Instance & inst, StepSet block, int cap) -> vector<int32_t>
    {
        vector<int32_t> users;
        for (int u = 0; u < inst.user_count && int(users.size()) < cap; ++u)
            if ((block & ~inst.auth[u]) == 0)
                users.push_back(u);
        return users;
    }

    auto candidate_users(const Instance & inst, StepSet block, int cap, BlockEdgeCache & cache)
        -> const vector<int32_t> &
    {
        if (auto it = cache.entries.find(block); it != cache.entries.end()) {
            ++cache.hits;
            return it->second;
        }
        ++cache.misses;
        if (cache.entries.size() >= BlockEdgeCache::clear_at) {
            cache.entries.clear();
            ++cache.clears;
        }
        return cache.entries.emplace(block, candidate_users(inst, block, cap)).first->second;
    }

    namespace
    {
        // Kuhn-style augmentation over edge rows; blocks are visited at most
        // once per search, so a search touches O(blocks * cap) edges.
        struct RowMatcher
        {
            const int32_t * edges;
            const int32_t * edge_count;
            std::size_t stride;
            int nblocks;
            int32_t * matched;
            uint64_t * touched;

            auto row(int b) const -> const int32_t * { return edges + std::size_t(b) * stride; }

            auto holder_of(int user) const -> int
            {
                for (int b = 0; b < nblocks; ++b)
                    if (matched[b] == user)
                        return b;
                return -1;
            }

            auto augment(int b, uint64_t & visited) -> bool
            {
                const int32_t * r = row(b);
                for (int i = 0; i < edge_count[b]; ++i) {
                    ++*touched;
                    if (holder_of(r[i]) < 0) {
                        matched[b] = r[i];
                        return true;
                    }
                }
                for (int i = 0; i < edge_count[b]; ++i) {
                    ++*touched;
                    int h = holder_of(r[i]);
                    if (h >= 0 && ! (visited & (uint64_t{1} << h))) {
                        visited |= uint64_t{1} << h;
                        if (augment(h, visited)) {
                            matched[b] = r[i];
                            return true;
                        }
                    }
                }
                return false;
            }
        };
    }

    auto is_authorised(const Instance & inst, const Pattern & pat, int cap) -> AuthResult
    {
        if (cap < 0)
            cap = inst.step_count;
        int nb = int(pat.blocks.size());
        std::size_t stride = std::max(cap, 1);

        vector<int32_t> edges(std::size_t(nb) * stride);
        vector<int32_t> edge_count(nb);
        vector<int32_t> matched(nb, -1);
        uint64_t touched = 0;

        for (int b = 0; b < nb; ++b) {
            auto users = candidate_users(inst, pat.blocks[b], cap);
            edge_count[b] = int32_t(users.size());
            std::copy(users.begin(), users.end(), edges.begin() + std::size_t(b) * stride);
        }

        RowMatcher m{edges.data(), edge_count.data(), stride, nb, matched.data(), &touched};
        AuthResult res;
        res.ok = true;
        for (int b = 0; b < nb; ++b) {
            uint64_t visited = uint64_t{1} << b;
            if (! m.augment(b, visited)) {
                res.ok = false;
                return res;
            }
        }
        res.user_of_block.assign(matched.begin(), matched.end());
        return res;
    }

    auto plan_from_matching(const Pattern & pat, const vector<int> & user_of_block,
        int step_count) -> Plan
    {
        Plan plan = Plan::empty(step_count);
        for (std::size_t b = 0; b < pat.blocks.size(); ++b)
            for (StepSet rest = pat.blocks[b]; rest; rest &= rest - 1)
                plan.user_of_step[std::countr_zero(rest)] = user_of_block[b];
        return plan;
    }

    AssignmentState::AssignmentState(const Instance & inst, int cap) :
        inst_(inst),
        cap_(cap < 0 ? inst.step_count : cap)
    {
        int k = inst.step_count;
        blocks_.resize(k);
        edges_.resize(std::size_t(k) * cap_);
        edge_count_.resize(k);
        matched_.resize(k);
        trail_.resize(k);
        trail_edges_.resize(std::size_t(k) * cap_);
        trail_matched_.resize(std::size_t(k) * k);
    }

    auto AssignmentState::fill_edge_row(int idx) -> void
    {
        const auto & users = candidate_users(inst_, blocks_[idx], cap_, cache_);
        edge_count_[idx] = int32_t(users.size());
        std::copy(users.begin(), users.end(), edge_row(idx));
    }

    auto AssignmentState::augment(int b, uint64_t & visited) -> bool
    {
        RowMatcher m{edges_.data(), edge_count_.data(), std::size_t(cap_), nblocks_,
            matched_.data(), &edges_touched_};
        return m.augment(b, visited);
    }

    auto AssignmentState::augment_all_unmatched() -> bool
    {
        // one Berge augmentation per deficient block keeps the matching
        // maximum; pushed from a full state this loop runs exactly once
        matched_count_ = 0;
        for (int b = 0; b < nblocks_; ++b) {
            if (matched_[b] < 0) {
                uint64_t visited = uint64_t{1} << b;
                if (augment(b, visited))
                    ++matched_count_;
            }
            else
                ++matched_count_;
        }
        if (matched_count_ != nblocks_)
            matched_count_ = int(std::count_if(matched_.begin(), matched_.begin() + nblocks_,
                [](int32_t u) { return u >= 0; }));
        return matched_count_ == nblocks_;
    }

    auto AssignmentState::push_new_block(int s) -> bool
    {
        auto & t = trail_[depth_];
        t.extend = false;
        t.block_idx = nblocks_;
        t.old_matched_count = matched_count_;
        std::memcpy(trail_matched_.data() + std::size_t(depth_) * blocks_.size(),
            matched_.data(), blocks_.size() * sizeof(int32_t));
        ++depth_;

        blocks_[nblocks_] = step_bit(s);
        matched_[nblocks_] = -1;
        fill_edge_row(nblocks_);
        ++nblocks_;
        return augment_all_unmatched();
    }

    auto AssignmentState::push_extend_block(int block_idx, int s) -> bool
    {
        auto & t = trail_[depth_];
        t.extend = true;
        t.block_idx = block_idx;
        t.old_block = blocks_[block_idx];
        t.old_edge_count = edge_count_[block_idx];
        t.old_matched_count = matched_count_;
        std::memcpy(trail_edges_.data() + std::size_t(depth_) * cap_,
            edge_row(block_idx), std::size_t(cap_) * sizeof(int32_t));
        std::memcpy(trail_matched_.data() + std::size_t(depth_) * blocks_.size(),
            matched_.data(), blocks_.size() * sizeof(int32_t));
        ++depth_;

        blocks_[block_idx] |= step_bit(s);
        matched_[block_idx] = -1;
        fill_edge_row(block_idx);
        return augment_all_unmatched();
    }

    auto AssignmentState::pop() -> void
    {
        if (depth_ == 0)
            throw StructuralError{"pop without matching push"};
        --depth_;
        const auto & t = trail_[depth_];
        if (t.extend) {
            blocks_[t.block_idx] = t.old_block;
            edge_count_[t.block_idx] = t.old_edge_count;
            std::memcpy(edge_row(t.block_idx), trail_edges_.data() + std::size_t(depth_) * cap_,
                std::size_t(cap_) * sizeof(int32_t));
        }
        else
            --nblocks_;
        matched_count_ = t.old_matched_count;
        std::memcpy(matched_.data(), trail_matched_.data() + std::size_t(depth_) * blocks_.size(),
            blocks_.size() * sizeof(int32_t));
    }

    auto AssignmentState::current_pattern() const -> Pattern
    {
        Pattern p;
        p.blocks.assign(blocks_.begin(), blocks_.begin() + nblocks_);
        p.canonicalize();
        return p;
    }

    auto AssignmentState::current_plan() const -> Plan
    {
        Plan plan = Plan::empty(inst_.step_count);
        for (int b = 0; b < nblocks_; ++b)
            for (StepSet rest = blocks_[b]; rest; rest &= rest - 1)
                plan.user_of_step[std::countr_zero(rest)] = matched_[b];
        return plan;
    }
}
