#include "oracle.hh"

#include <algorithm>
#include <bit>
#include <functional>
#include <set>

using std::optional;
using std::pair;
using std::popcount;
using std::vector;

namespace wsp::oracle
{
    namespace
    {
        auto pattern_from_rgs(const vector<int> & rgs) -> Pattern
        {
            Pattern pat;
            for (int s = 0; s < int(rgs.size()); ++s) {
                if (rgs[s] >= int(pat.blocks.size()))
                    pat.blocks.push_back(0);
                pat.blocks[rgs[s]] |= step_bit(s);
            }
            return pat;
        }

        auto block_of_step(const Pattern & pat, int s) -> int
        {
            for (int b = 0; b < int(pat.blocks.size()); ++b)
                if (pat.blocks[b] & step_bit(s))
                    return b;
            return -1;
        }

        auto blocks_hitting(const Pattern & pat, StepSet scope) -> int
        {
            int count = 0;
            for (auto block : pat.blocks)
                if (block & scope)
                    ++count;
            return count;
        }
    }

    auto all_patterns(int k) -> vector<Pattern>
    {
        vector<Pattern> out;
        vector<int> rgs(k);
        std::function<void(int, int)> descend = [&] (int depth, int used) {
            if (depth == k) {
                out.push_back(pattern_from_rgs(rgs));
                return;
            }
            for (int b = 0; b <= used && b < k; ++b) {
                rgs[depth] = b;
                descend(depth + 1, std::max(used, b + 1));
            }
        };
        descend(0, 0);
        return out;
    }

    auto pattern_eligible(const Instance & inst, const Pattern & pat) -> bool
    {
        for (const auto & c : inst.constraints) {
            switch (c.kind) {
                case ConstraintKind::NotEquals:
                    if (block_of_step(pat, c.scope[0]) == block_of_step(pat, c.scope[1]))
                        return false;
                    break;
                case ConstraintKind::Equals:
                    if (block_of_step(pat, c.scope[0]) != block_of_step(pat, c.scope[1]))
                        return false;
                    break;
                case ConstraintKind::AtMost:
                    if (blocks_hitting(pat, c.scope_mask) > c.r)
                        return false;
                    break;
                case ConstraintKind::AtLeast:
                    if (blocks_hitting(pat, c.scope_mask) < c.r)
                        return false;
                    break;
                case ConstraintKind::Threshold:
                    for (auto block : pat.blocks) {
                        int inside = popcount(block & c.scope_mask);
                        if (inside > 0 && (inside < c.t_lo || inside > c.t_hi))
                            return false;
                    }
                    break;
            }
        }
        return true;
    }

    auto pattern_authorised(const Instance & inst, const Pattern & pat) -> optional<Plan>
    {
        int nblocks = int(pat.blocks.size());
        vector<vector<int>> candidates(nblocks);
        for (int b = 0; b < nblocks; ++b)
            for (int u = 0; u < inst.user_count; ++u)
                if ((inst.auth[u] & pat.blocks[b]) == pat.blocks[b])
                    candidates[b].push_back(u);

        vector<int> block_of_user(inst.user_count, -1);
        vector<char> seen(inst.user_count);
        std::function<bool(int)> try_match = [&] (int b) {
            for (int u : candidates[b]) {
                if (seen[u])
                    continue;
                seen[u] = 1;
                if (block_of_user[u] < 0 || try_match(block_of_user[u])) {
                    block_of_user[u] = b;
                    return true;
                }
            }
            return false;
        };

        for (int b = 0; b < nblocks; ++b) {
            std::fill(seen.begin(), seen.end(), 0);
            if (! try_match(b))
                return std::nullopt;
        }

        Plan plan = Plan::empty(inst.step_count);
        for (int u = 0; u < inst.user_count; ++u)
            if (block_of_user[u] >= 0)
                for (int s = 0; s < inst.step_count; ++s)
                    if (pat.blocks[block_of_user[u]] & step_bit(s))
                        plan.user_of_step[s] = u;
        return plan;
    }

    auto solve_by_patterns(const Instance & inst) -> optional<Plan>
    {
        for (const auto & pat : all_patterns(inst.step_count))
            if (pattern_eligible(inst, pat))
                if (auto plan = pattern_authorised(inst, pat))
                    return plan;
        return std::nullopt;
    }

    auto plan_valid(const Instance & inst, const vector<int> & user_of_step) -> bool
    {
        for (int s = 0; s < inst.step_count; ++s) {
            int u = user_of_step[s];
            if (u < 0 || u >= inst.user_count || ! (inst.auth[u] & step_bit(s)))
                return false;
        }
        for (const auto & c : inst.constraints) {
            std::set<int> distinct;
            for (int s : c.scope)
                distinct.insert(user_of_step[s]);
            switch (c.kind) {
                case ConstraintKind::NotEquals:
                    if (distinct.size() != 2)
                        return false;
                    break;
                case ConstraintKind::Equals:
                    if (distinct.size() != 1)
                        return false;
                    break;
                case ConstraintKind::AtMost:
                    if (int(distinct.size()) > c.r)
                        return false;
                    break;
                case ConstraintKind::AtLeast:
                    if (int(distinct.size()) < c.r)
                        return false;
                    break;
                case ConstraintKind::Threshold:
                    for (int u : distinct) {
                        int count = 0;
                        for (int s : c.scope)
                            count += user_of_step[s] == u;
                        if (count < c.t_lo || count > c.t_hi)
                            return false;
                    }
                    break;
            }
        }
        return true;
    }

    auto all_valid_plans(const Instance & inst) -> vector<vector<int>>
    {
        vector<vector<int>> out;
        vector<int> plan(inst.step_count, 0);
        while (true) {
            if (plan_valid(inst, plan))
                out.push_back(plan);
            int s = 0;
            while (s < inst.step_count && plan[s] == inst.user_count - 1)
                plan[s++] = 0;
            if (s == inst.step_count)
                break;
            ++plan[s];
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    auto edge_count_extremes(int q, int r) -> pair<long long, long long>
    {
        long long lo = -1, hi = -1;
        for (const auto & pat : all_patterns(q)) {
            if (int(pat.blocks.size()) != r)
                continue;
            long long edges = 0;
            for (auto block : pat.blocks) {
                long long size = popcount(block);
                edges += size * (size - 1) / 2;
            }
            if (lo < 0 || edges < lo)
                lo = edges;
            if (edges > hi)
                hi = edges;
        }
        return {lo, hi};
    }
}
