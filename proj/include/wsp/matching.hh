#pragma once

#include <wsp/core.hh>

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace wsp
{
    // Block -> capped candidate-user lists, keyed by the block's step set.
    // The whole cache is dropped once it holds 16384 records; no eviction.
    struct BlockEdgeCache
    {
        static constexpr std::size_t clear_at = 16384;

        std::unordered_map<StepSet, std::vector<std::int32_t>> entries;
        std::uint64_t hits = 0, misses = 0, clears = 0;
    };

    // Users authorised for every step of the block, ascending, at most cap.
    auto candidate_users(const Instance & inst, StepSet block, int cap) -> std::vector<std::int32_t>;
    auto candidate_users(const Instance & inst, StepSet block, int cap, BlockEdgeCache & cache)
        -> const std::vector<std::int32_t> &;

    struct AuthResult
    {
        bool ok = false;
        std::vector<int> user_of_block;   // witness, parallel to pattern blocks
    };

    // Matching covering every block of the assignment graph decides whether a
    // pattern is authorised; cap < 0 selects the instance's step count, the
    // bound under which capped and uncapped verdicts coincide.
    auto is_authorised(const Instance & inst, const Pattern & pat, int cap = -1) -> AuthResult;

    auto plan_from_matching(const Pattern & pat, const std::vector<int> & user_of_block,
        int step_count) -> Plan;

    // Incrementally maintained assignment graph and matching for the pattern
    // DFS. Each push changes one block, recomputes that block's capped edge
    // row, and runs augmenting-path searches from the unmatched blocks (one,
    // in solver use); pop restores the previous state exactly. All buffers
    // are sized once at construction: the search loop never allocates.
    class AssignmentState
    {
    public:
        explicit AssignmentState(const Instance & inst, int cap = -1);

        auto block_count() const -> int { return nblocks_; }
        auto block(int idx) const -> StepSet { return blocks_[idx]; }
        auto full() const -> bool { return matched_count_ == nblocks_; }
        auto matched_user(int idx) const -> int { return matched_[idx]; }

        auto push_new_block(int s) -> bool;
        auto push_extend_block(int block_idx, int s) -> bool;
        auto pop() -> void;

        auto current_pattern() const -> Pattern;
        auto current_plan() const -> Plan;    // requires full()

        auto cache() -> BlockEdgeCache & { return cache_; }
        auto edges_touched() const -> std::uint64_t { return edges_touched_; }

    private:
        auto edge_row(int idx) -> std::int32_t * { return edges_.data() + std::size_t(idx) * cap_; }
        auto fill_edge_row(int idx) -> void;
        auto augment(int b, std::uint64_t & visited) -> bool;
        auto augment_all_unmatched() -> bool;

        const Instance & inst_;
        int cap_;
        BlockEdgeCache cache_;

        int nblocks_ = 0;
        int matched_count_ = 0;
        std::vector<StepSet> blocks_;
        std::vector<std::int32_t> edges_;        // k rows of cap entries
        std::vector<std::int32_t> edge_count_;
        std::vector<std::int32_t> matched_;      // user matched to block, -1 if none

        struct TrailEntry
        {
            bool extend = false;
            int block_idx = -1;
            StepSet old_block = 0;
            std::int32_t old_edge_count = 0;
            std::int32_t old_matched_count = 0;
        };

        int depth_ = 0;
        std::vector<TrailEntry> trail_;
        std::vector<std::int32_t> trail_edges_;     // per level, the replaced edge row
        std::vector<std::int32_t> trail_matched_;   // per level, the full matched_ row

        std::uint64_t edges_touched_ = 0;
    };
}
