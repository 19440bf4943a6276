#include <wsp/solver.hh>

#include <algorithm>
#include <bit>
#include <limits>

using std::chrono::duration_cast;
using std::chrono::milliseconds;
using std::chrono::steady_clock;

namespace wsp
{
    namespace
    {
        auto count_overlap_pairs(const Instance & inst, int s, bool literal) -> int
        {
            int pairs = 0;
            for (const auto & ca : inst.constraints) {
                if (ca.kind != ConstraintKind::AtLeast)
                    continue;
                for (const auto & cm : inst.constraints) {
                    if (cm.kind != ConstraintKind::AtMost)
                        continue;
                    auto common = ca.scope_mask & cm.scope_mask;
                    if (std::popcount(common) < 3)
                        continue;
                    if (literal || (common & step_bit(s)))
                        ++pairs;
                }
            }
            return pairs;
        }
    }

    PbtSearch::PbtSearch(const Instance & inst, SolveOptions opts) :
        inst_(inst),
        opts_(opts),
        state_(inst)
    {
        inst.validate();
        for (const auto & c : inst.constraints) {
            if (c.kind == ConstraintKind::Equals)
                throw ConfigError{"equals constraints must be merged away before the pattern search"};
            if (c.kind == ConstraintKind::Threshold)
                throw ConfigError{"threshold constraints are not supported by the pattern search"};
        }

        auto k = inst.step_count;
        ne_mask_.assign(static_cast<std::size_t>(k), 0);
        for (const auto & c : inst.constraints) {
            if (c.kind != ConstraintKind::NotEquals)
                continue;
            ne_mask_[static_cast<std::size_t>(c.scope[0])] |= step_bit(c.scope[1]);
            ne_mask_[static_cast<std::size_t>(c.scope[1])] |= step_bit(c.scope[0]);
        }

        counters_of_step_.assign(static_cast<std::size_t>(k), {});
        for (const auto & c : inst.constraints) {
            if (c.kind != ConstraintKind::AtMost && c.kind != ConstraintKind::AtLeast)
                continue;
            auto ci = static_cast<std::int32_t>(counters_.size());
            counters_.push_back(Counter{c.kind == ConstraintKind::AtMost, c.r, c.scope_mask});
            for (auto s : c.scope)
                counters_of_step_[static_cast<std::size_t>(s)].push_back(ci);
        }

        rho_static_.assign(static_cast<std::size_t>(k), 0.0);
        const auto & w = opts_.weights;
        for (int s = 0; s < k; ++s) {
            int ne = 0, ne_le = 0;
            for (const auto & c : inst.constraints) {
                if (c.kind != ConstraintKind::NotEquals || ! (c.scope_mask & step_bit(s)))
                    continue;
                ++ne;
                for (const auto & cm : inst.constraints)
                    if (cm.kind == ConstraintKind::AtMost && (c.scope_mask & ~cm.scope_mask) == 0) {
                        ++ne_le;
                        break;
                    }
            }
            auto pairs = count_overlap_pairs(inst, s, opts_.literal_pair_overlap);
            rho_static_[static_cast<std::size_t>(s)] = w.a_ne * ne + w.a_ne_le * ne_le + w.a_ge_le * pairs;
        }

        pushed_step_.assign(static_cast<std::size_t>(k), -1);
        counter_trail_.resize(static_cast<std::size_t>(k) * std::max<std::size_t>(counters_.size(), 1));
        counter_trail_len_.assign(static_cast<std::size_t>(k), 0);
        moves_at_depth_.assign(static_cast<std::size_t>(k), {});
        for (auto & row : moves_at_depth_)
            row.reserve(static_cast<std::size_t>(k) + 1);
        stats_.nodes_at_depth.assign(static_cast<std::size_t>(k) + 1, 0);
        found_plan_ = Plan::empty(k);
    }

    auto PbtSearch::extensions_into(int s, std::vector<Move> & out) -> void
    {
        out.clear();

        auto violates_counting = [&] (int bidx) -> bool {
            for (auto ci : counters_of_step_[static_cast<std::size_t>(s)]) {
                const auto & c = counters_[static_cast<std::size_t>(ci)];
                auto touched = c.touched_blocks | (std::uint64_t{1} << bidx);
                auto distinct = std::popcount(touched);
                if (c.at_most) {
                    if (distinct > c.r) {
                        ++stats_.prune_at_most;
                        return true;
                    }
                }
                else {
                    auto remaining = std::popcount(c.scope_mask & ~(assigned_ | step_bit(s)));
                    if (distinct + remaining < c.r) {
                        ++stats_.prune_at_least;
                        return true;
                    }
                }
            }
            return false;
        };

        auto nblocks = state_.block_count();
        for (int b = 0; b < nblocks; ++b) {
            if (state_.block(b) & ne_mask_[static_cast<std::size_t>(s)]) {
                ++stats_.prune_not_equals;
                continue;
            }
            if (violates_counting(b))
                continue;
            out.push_back(Move{b});
        }

        // a fresh block cannot clash with a not-equals constraint
        if (! violates_counting(nblocks))
            out.push_back(Move{-1});
    }

    auto PbtSearch::extensions(int s) -> std::vector<Move>
    {
        std::vector<Move> out;
        extensions_into(s, out);
        return out;
    }

    auto PbtSearch::score(int s) const -> double
    {
        auto rho = rho_static_[static_cast<std::size_t>(s)];
        const auto & w = opts_.weights;
        for (auto ci : counters_of_step_[static_cast<std::size_t>(s)]) {
            const auto & c = counters_[static_cast<std::size_t>(ci)];
            if (! c.at_most)
                continue;
            auto used = opts_.literal_step_count ? c.assigned_in_scope : std::popcount(c.touched_blocks);
            auto slack = c.r - used;
            if (slack == 0)
                rho += w.a0_le;
            else if (slack == 1)
                rho += w.a1_le;
            else if (slack == 2)
                rho += w.a2_le;
        }
        return rho;
    }

    auto PbtSearch::select_step() const -> int
    {
        auto unassigned = inst_.all_steps() & ~assigned_;
        if (unassigned == 0)
            throw StructuralError{"select_step called on a complete assignment"};

        if (! opts_.heuristic)
            return std::countr_zero(unassigned);

        int best = -1;
        auto best_score = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < inst_.step_count; ++s) {
            if (! (unassigned & step_bit(s)))
                continue;
            auto sc = score(s);
            if (sc > best_score) {
                best_score = sc;
                best = s;
            }
        }
        return best;
    }

    auto PbtSearch::push(int s, Move m) -> bool
    {
        auto level = static_cast<std::size_t>(depth_);
        auto bidx = m.new_block() ? state_.block_count() : m.block_idx;

        auto base = level * std::max<std::size_t>(counters_.size(), 1);
        std::int32_t len = 0;
        for (auto ci : counters_of_step_[static_cast<std::size_t>(s)]) {
            auto & c = counters_[static_cast<std::size_t>(ci)];
            counter_trail_[base + static_cast<std::size_t>(len)] = CounterUndo{ci, c.assigned_in_scope, c.touched_blocks};
            ++len;
            c.touched_blocks |= std::uint64_t{1} << bidx;
            ++c.assigned_in_scope;
        }
        counter_trail_len_[level] = len;
        pushed_step_[level] = static_cast<std::int32_t>(s);
        assigned_ |= step_bit(s);
        ++depth_;

        auto ok = m.new_block() ? state_.push_new_block(s) : state_.push_extend_block(m.block_idx, s);
        if (! ok)
            ++stats_.prune_authorisation;
        return ok;
    }

    auto PbtSearch::pop_move() -> void
    {
        if (depth_ == 0)
            throw StructuralError{"pop_move on the root state"};

        --depth_;
        auto level = static_cast<std::size_t>(depth_);
        state_.pop();

        auto base = level * std::max<std::size_t>(counters_.size(), 1);
        for (auto i = counter_trail_len_[level]; i > 0; --i) {
            const auto & undo = counter_trail_[base + static_cast<std::size_t>(i - 1)];
            auto & c = counters_[static_cast<std::size_t>(undo.counter_idx)];
            c.assigned_in_scope = undo.old_assigned;
            c.touched_blocks = undo.old_touched;
        }
        assigned_ &= ~step_bit(pushed_step_[level]);
    }

    auto PbtSearch::dfs(int depth) -> SolveVerdict
    {
        ++stats_.nodes;
        ++stats_.nodes_at_depth[static_cast<std::size_t>(depth)];
        if (depth > stats_.max_depth)
            stats_.max_depth = depth;
        if (node_hook)
            node_hook(state_.current_pattern());

        if (has_deadline_ && (stats_.nodes & 1023u) == 0 && steady_clock::now() > deadline_) {
            timed_out_ = true;
            return SolveVerdict::TimedOut;
        }

        if (depth == inst_.step_count) {
            found_plan_ = state_.current_plan();
            return SolveVerdict::Sat;
        }

        auto s = select_step();
        auto & moves = moves_at_depth_[static_cast<std::size_t>(depth)];
        extensions_into(s, moves);
        for (auto m : moves) {
            auto ok = push(s, m);
            if (! ok) {
                pop_move();
                continue;
            }
            auto v = dfs(depth + 1);
            pop_move();
            if (v != SolveVerdict::Unsat)
                return v;
        }
        return SolveVerdict::Unsat;
    }

    auto PbtSearch::solve() -> SolveResult
    {
        if (depth_ != 0)
            throw StructuralError{"solve must start from the root state"};

        stats_ = SolveStats{};
        stats_.nodes_at_depth.assign(static_cast<std::size_t>(inst_.step_count) + 1, 0);
        timed_out_ = false;

        auto t0 = steady_clock::now();
        has_deadline_ = opts_.timeout_ms > 0;
        if (has_deadline_)
            deadline_ = t0 + milliseconds(opts_.timeout_ms);

        auto verdict = dfs(0);

        SolveResult result;
        result.verdict = verdict;
        result.plan = verdict == SolveVerdict::Sat ? found_plan_ : Plan::empty(inst_.step_count);
        result.stats = stats_;
        result.wall_ms = std::chrono::duration<double, std::milli>(steady_clock::now() - t0).count();
        return result;
    }

    auto solve(const Instance & inst, SolveOptions opts) -> SolveResult
    {
        PbtSearch search{inst, opts};
        return search.solve();
    }

    auto search_stats(const SolveResult & result) -> StatsReport
    {
        StatsReport report;
        report.nodes = result.stats.nodes;
        report.nodes_at_depth = result.stats.nodes_at_depth;
        report.max_depth = result.stats.max_depth;
        for (int d = 0; d < report.max_depth; ++d) {
            auto parent = report.nodes_at_depth[static_cast<std::size_t>(d)];
            auto child = report.nodes_at_depth[static_cast<std::size_t>(d) + 1];
            report.branching.push_back(parent == 0 ? 0.0 : static_cast<double>(child) / static_cast<double>(parent));
        }
        return report;
    }
}
