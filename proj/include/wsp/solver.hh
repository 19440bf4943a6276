#pragma once

#include <wsp/core.hh>
#include <wsp/matching.hh>

#include <chrono>
#include <cstdint>
#include <functional>
#include <vector>

namespace wsp
{
    struct HeuristicWeights
    {
        double a_ne = 3;       // not-equals covering s
        double a_ne_le = 4;    // not-equals nested in an at-most scope
        double a_ge_le = 2;    // (at-least, at-most) pairs overlapping on >= 3 steps
        double a0_le = 40;     // at-most scope with no slack left
        double a1_le = 4;      // one unit of slack
        double a2_le = 0;      // two units of slack
    };

    struct SolveOptions
    {
        bool heuristic = true;
        HeuristicWeights weights;
        // literal reading of the overlap term: a constant pair count that
        // ignores s (and so cannot affect the argmax)
        bool literal_pair_overlap = false;
        // literal reading of the at-most slack: count assigned scope steps
        // instead of distinct touched blocks
        bool literal_step_count = false;
        std::int64_t timeout_ms = 0;   // 0 = no limit
    };

    enum class SolveVerdict
    {
        Sat,
        Unsat,
        TimedOut
    };

    struct SolveStats
    {
        std::uint64_t nodes = 0;
        std::vector<std::uint64_t> nodes_at_depth;
        std::uint64_t prune_not_equals = 0;
        std::uint64_t prune_at_most = 0;
        std::uint64_t prune_at_least = 0;
        std::uint64_t prune_authorisation = 0;
        int max_depth = 0;
    };

    struct SolveResult
    {
        SolveVerdict verdict = SolveVerdict::Unsat;
        Plan plan;   // complete valid plan when Sat
        SolveStats stats;
        double wall_ms = 0;
    };

    // A candidate extension: join an existing block, or open a new one (-1).
    struct Move
    {
        int block_idx = -1;

        auto new_block() const -> bool { return block_idx < 0; }
    };

    // Depth-first search over patterns. Each node owns a pattern; extending
    // with an unassigned step either joins an existing block or opens a new
    // one, so distinct nodes hold distinct patterns and nothing is revisited.
    // Pruning: not-equals and counting-constraint eligibility on the move,
    // then the incremental matching test.
    class PbtSearch
    {
    public:
        PbtSearch(const Instance & inst, SolveOptions opts = {});

        auto solve() -> SolveResult;

        // The pieces below are the solve loop's internals, exposed so tests
        // can drive single search steps.
        auto extensions(int s) -> std::vector<Move>;
        auto score(int s) const -> double;
        auto select_step() const -> int;
        auto push(int s, Move m) -> bool;
        auto pop_move() -> void;

        auto assigned() const -> StepSet { return assigned_; }
        auto assignment() -> AssignmentState & { return state_; }
        auto stats() const -> const SolveStats & { return stats_; }

        // invoked once per visited node with the node's pattern
        std::function<void(const Pattern &)> node_hook;

    private:
        struct Counter
        {
            bool at_most;
            int r;
            StepSet scope_mask;
            std::uint64_t touched_blocks = 0;
            int assigned_in_scope = 0;
        };

        struct CounterUndo
        {
            std::int32_t counter_idx;
            std::int32_t old_assigned;
            std::uint64_t old_touched;
        };

        auto extensions_into(int s, std::vector<Move> & out) -> void;
        auto dfs(int depth) -> SolveVerdict;

        const Instance & inst_;
        SolveOptions opts_;
        AssignmentState state_;

        std::vector<Counter> counters_;
        std::vector<std::vector<std::int32_t>> counters_of_step_;
        std::vector<StepSet> ne_mask_;
        std::vector<double> rho_static_;

        StepSet assigned_ = 0;
        std::vector<std::int32_t> pushed_step_;          // per level
        std::vector<CounterUndo> counter_trail_;         // k * |counters_| slots
        std::vector<std::int32_t> counter_trail_len_;    // per level
        std::vector<std::vector<Move>> moves_at_depth_;
        int depth_ = 0;

        SolveStats stats_;
        Plan found_plan_;
        std::chrono::steady_clock::time_point deadline_;
        bool has_deadline_ = false;
        bool timed_out_ = false;
    };

    auto solve(const Instance & inst, SolveOptions opts = {}) -> SolveResult;

    struct StatsReport
    {
        std::uint64_t nodes = 0;
        std::vector<std::uint64_t> nodes_at_depth;
        std::vector<double> branching;   // branching[d] = nodes(d+1) / nodes(d)
        int max_depth = 0;
    };

    auto search_stats(const SolveResult & result) -> StatsReport;
}
