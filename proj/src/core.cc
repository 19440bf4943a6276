#include <wsp/core.hh>

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <set>

using std::popcount;
using std::set;
using std::sort;
using std::string;
using std::to_string;
using std::vector;

namespace wsp
{
    namespace
    {
        auto make_scope(vector<int> scope) -> std::pair<vector<int>, StepSet>
        {
            sort(scope.begin(), scope.end());
            StepSet mask = 0;
            for (int s : scope) {
                if (s < 0 || s >= max_steps)
                    throw StructuralError{"scope step out of range: s" + to_string(s)};
                if (mask & step_bit(s))
                    throw StructuralError{"duplicate step in scope: s" + to_string(s)};
                mask |= step_bit(s);
            }
            return {std::move(scope), mask};
        }
    }

    auto kind_name(ConstraintKind k) -> string
    {
        switch (k) {
        case ConstraintKind::NotEquals: return "not-equals";
        case ConstraintKind::Equals: return "equals";
        case ConstraintKind::AtMost: return "at-most";
        case ConstraintKind::AtLeast: return "at-least";
        case ConstraintKind::Threshold: return "threshold";
        }
        return "?";
    }

    auto Constraint::not_equals(int s1, int s2) -> Constraint
    {
        auto [scope, mask] = make_scope({s1, s2});
        return Constraint{ConstraintKind::NotEquals, 0, 0, 0, std::move(scope), mask};
    }

    auto Constraint::equals(int s1, int s2) -> Constraint
    {
        auto [scope, mask] = make_scope({s1, s2});
        return Constraint{ConstraintKind::Equals, 0, 0, 0, std::move(scope), mask};
    }

    auto Constraint::at_most(int r, vector<int> scope) -> Constraint
    {
        auto [sc, mask] = make_scope(std::move(scope));
        return Constraint{ConstraintKind::AtMost, r, 0, 0, std::move(sc), mask};
    }

    auto Constraint::at_least(int r, vector<int> scope) -> Constraint
    {
        auto [sc, mask] = make_scope(std::move(scope));
        return Constraint{ConstraintKind::AtLeast, r, 0, 0, std::move(sc), mask};
    }

    auto Constraint::threshold(int t_lo, int t_hi, vector<int> scope) -> Constraint
    {
        auto [sc, mask] = make_scope(std::move(scope));
        return Constraint{ConstraintKind::Threshold, 0, t_lo, t_hi, std::move(sc), mask};
    }

    auto Instance::all_steps() const -> StepSet
    {
        return step_count == 64 ? ~StepSet{0} : (step_bit(step_count) - 1);
    }

    auto Instance::validate() const -> void
    {
        if (step_count < 1 || step_count > max_steps)
            throw StructuralError{"step count must be in 1.." + to_string(max_steps)};
        if (user_count < 0)
            throw StructuralError{"negative user count"};
        if (int(auth.size()) != user_count)
            throw StructuralError{"auth table size differs from user count"};
        for (auto a : auth)
            if (a & ~all_steps())
                throw StructuralError{"authorised step out of range"};

        // scopes within one constraint family must be pairwise distinct
        set<std::pair<int, StepSet>> seen;
        for (const auto & c : constraints) {
            if (c.scope.empty() || (c.scope_mask & ~all_steps()))
                throw StructuralError{"constraint scope out of range"};
            switch (c.kind) {
            case ConstraintKind::NotEquals:
            case ConstraintKind::Equals:
                if (c.scope.size() != 2)
                    throw StructuralError{kind_name(c.kind) + " needs a 2-step scope"};
                break;
            case ConstraintKind::AtMost:
            case ConstraintKind::AtLeast:
                if (c.r < 1 || c.r > int(c.scope.size()))
                    throw StructuralError{kind_name(c.kind) + " bound outside 1..|scope|"};
                break;
            case ConstraintKind::Threshold:
                if (c.t_lo < 1 || c.t_lo > c.t_hi || c.t_hi > int(c.scope.size()))
                    throw StructuralError{"threshold bounds outside 1 <= t_lo <= t_hi <= |scope|"};
                break;
            }
            if (! seen.emplace(int(c.kind), c.scope_mask).second)
                throw StructuralError{"duplicate " + kind_name(c.kind) + " scope"};
        }
    }

    auto Plan::empty(int step_count) -> Plan
    {
        return Plan{vector<int>(step_count, -1)};
    }

    auto Plan::domain() const -> StepSet
    {
        StepSet d = 0;
        for (std::size_t s = 0; s < user_of_step.size(); ++s)
            if (user_of_step[s] >= 0)
                d |= step_bit(int(s));
        return d;
    }

    auto Plan::complete() const -> bool
    {
        return std::none_of(user_of_step.begin(), user_of_step.end(), [](int u) { return u < 0; });
    }

    auto Pattern::covered() const -> StepSet
    {
        StepSet c = 0;
        for (auto b : blocks)
            c |= b;
        return c;
    }

    auto Pattern::canonicalize() -> void
    {
        sort(blocks.begin(), blocks.end(), [](StepSet a, StepSet b) {
            return std::countr_zero(a) < std::countr_zero(b);
        });
    }

    auto Violation::describe(const Instance & inst) const -> string
    {
        if (is_authorisation)
            return "step s" + to_string(step) + " assigned to unauthorised user u" + to_string(user);
        const auto & c = inst.constraints.at(constraint_index);
        return kind_name(c.kind) + " constraint #" + to_string(constraint_index) + " violated";
    }

    auto constraint_satisfied(const Constraint & c, const Plan & plan) -> bool
    {
        switch (c.kind) {
        case ConstraintKind::NotEquals:
            return plan.user_of_step[c.scope[0]] != plan.user_of_step[c.scope[1]];
        case ConstraintKind::Equals:
            return plan.user_of_step[c.scope[0]] == plan.user_of_step[c.scope[1]];
        case ConstraintKind::AtMost:
        case ConstraintKind::AtLeast: {
            set<int> users;
            for (int s : c.scope)
                users.insert(plan.user_of_step[s]);
            return c.kind == ConstraintKind::AtMost ? int(users.size()) <= c.r
                                                    : int(users.size()) >= c.r;
        }
        case ConstraintKind::Threshold: {
            std::map<int, int> load;
            for (int s : c.scope)
                ++load[plan.user_of_step[s]];
            for (auto [u, cnt] : load)
                if (cnt < c.t_lo || cnt > c.t_hi)
                    return false;
            return true;
        }
        }
        return true;
    }

    auto verify_plan(const Instance & inst, const Plan & plan) -> Verdict
    {
        if (int(plan.user_of_step.size()) != inst.step_count)
            throw StructuralError{"plan length differs from step count"};
        for (std::size_t s = 0; s < plan.user_of_step.size(); ++s)
            if (int u = plan.user_of_step[s]; u >= inst.user_count)
                throw StructuralError{"plan user u" + to_string(u) + " out of range"};

        Verdict v;
        for (int s = 0; s < inst.step_count; ++s) {
            int u = plan.user_of_step[s];
            if (u >= 0 && ! (inst.auth[u] & step_bit(s))) {
                v.authorised = false;
                v.violations.push_back(Violation{true, s, u, -1});
            }
        }
        StepSet dom = plan.domain();
        for (std::size_t ci = 0; ci < inst.constraints.size(); ++ci) {
            const auto & c = inst.constraints[ci];
            if ((c.scope_mask & dom) != c.scope_mask)
                continue;
            if (! constraint_satisfied(c, plan)) {
                v.eligible = false;
                v.violations.push_back(Violation{false, -1, -1, int(ci)});
            }
        }
        return v;
    }

    auto pattern_of_plan(const Plan & plan) -> Pattern
    {
        std::map<int, StepSet> by_user;
        for (std::size_t s = 0; s < plan.user_of_step.size(); ++s)
            if (int u = plan.user_of_step[s]; u >= 0)
                by_user[u] |= step_bit(int(s));
        Pattern p;
        for (auto [u, block] : by_user)
            p.blocks.push_back(block);
        p.canonicalize();
        return p;
    }

    auto plans_equivalent(const Plan & p1, const Plan & p2) -> bool
    {
        return p1.domain() == p2.domain() && pattern_of_plan(p1) == pattern_of_plan(p2);
    }

    namespace
    {
        struct UnionFind
        {
            vector<int> parent;

            explicit UnionFind(int n) : parent(n)
            {
                std::iota(parent.begin(), parent.end(), 0);
            }

            auto find(int x) -> int
            {
                while (parent[x] != x)
                    x = parent[x] = parent[parent[x]];
                return x;
            }

            auto unite(int a, int b) -> void
            {
                a = find(a), b = find(b);
                if (a != b)
                    parent[std::max(a, b)] = std::min(a, b);
            }
        };
    }

    auto eliminate_equals(const Instance & inst) -> MergeResult
    {
        UnionFind uf{inst.step_count};
        for (const auto & c : inst.constraints)
            if (c.kind == ConstraintKind::Equals)
                uf.unite(c.scope[0], c.scope[1]);

        // dense renumbering of representatives, preserving step order
        vector<int> step_map(inst.step_count, -1);
        int merged_k = 0;
        for (int s = 0; s < inst.step_count; ++s)
            if (uf.find(s) == s)
                step_map[s] = merged_k++;
        for (int s = 0; s < inst.step_count; ++s)
            step_map[s] = step_map[uf.find(s)];

        MergeResult res;
        res.step_map = step_map;
        res.instance.step_count = merged_k;
        res.instance.user_count = inst.user_count;
        res.instance.auth.assign(inst.user_count, 0);
        // a merged step is authorised only for users authorised for all originals
        for (int u = 0; u < inst.user_count; ++u) {
            StepSet a = res.instance.all_steps();
            for (int s = 0; s < inst.step_count; ++s)
                if (! (inst.auth[u] & step_bit(s)))
                    a &= ~step_bit(step_map[s]);
            res.instance.auth[u] = a;
        }

        set<std::tuple<int, int, int, int, StepSet>> seen;
        for (const auto & c : inst.constraints) {
            if (c.kind == ConstraintKind::Equals)
                continue;
            vector<int> scope;
            StepSet mask = 0;
            for (int s : c.scope) {
                int m = step_map[s];
                if (! (mask & step_bit(m))) {
                    mask |= step_bit(m);
                    scope.push_back(m);
                }
            }
            sort(scope.begin(), scope.end());
            int q = int(scope.size());

            Constraint merged = c;
            merged.scope = std::move(scope);
            merged.scope_mask = mask;
            switch (c.kind) {
            case ConstraintKind::NotEquals:
                if (q < 2) {
                    res.trivially_unsat = true;
                    continue;
                }
                break;
            case ConstraintKind::AtMost:
                // a scope of q steps never meets more than q users
                merged.r = std::min(c.r, q);
                if (merged.r == q)
                    continue;
                break;
            case ConstraintKind::AtLeast:
                if (q < c.r) {
                    res.trivially_unsat = true;
                    continue;
                }
                if (merged.r <= 1)
                    continue;
                break;
            case ConstraintKind::Threshold:
                // a merged in-scope pair would count as one step instead of two,
                // which the unweighted threshold form cannot express
                if (q < int(c.scope.size()))
                    throw ConfigError{"equals-merged steps inside a threshold scope are not supported"};
                break;
            default:
                break;
            }
            if (seen.emplace(int(merged.kind), merged.r, merged.t_lo, merged.t_hi, merged.scope_mask).second)
                res.instance.constraints.push_back(std::move(merged));
        }
        return res;
    }

    auto expand_plan(const Plan & merged_plan, const vector<int> & step_map) -> Plan
    {
        Plan p;
        p.user_of_step.resize(step_map.size());
        for (std::size_t s = 0; s < step_map.size(); ++s)
            p.user_of_step[s] = merged_plan.user_of_step[step_map[s]];
        return p;
    }
}
