#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wsp
{
    // Steps and users are dense 0-based indices. Step sets are 64-bit masks,
    // so instances are limited to k <= 64 steps (enforced by Instance::validate).
    using StepSet = std::uint64_t;

    constexpr int max_steps = 64;

    inline auto step_bit(int s) -> StepSet { return StepSet{1} << s; }

    struct StructuralError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    struct ConfigError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    struct ParseError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    enum class ConstraintKind
    {
        NotEquals,
        Equals,
        AtMost,
        AtLeast,
        Threshold
    };

    auto kind_name(ConstraintKind k) -> std::string;

    struct Constraint
    {
        ConstraintKind kind;
        int r = 0;                    // AtMost / AtLeast bound
        int t_lo = 0, t_hi = 0;       // Threshold bounds
        std::vector<int> scope;       // ascending step indices, no duplicates
        StepSet scope_mask = 0;

        static auto not_equals(int s1, int s2) -> Constraint;
        static auto equals(int s1, int s2) -> Constraint;
        static auto at_most(int r, std::vector<int> scope) -> Constraint;
        static auto at_least(int r, std::vector<int> scope) -> Constraint;
        static auto threshold(int t_lo, int t_hi, std::vector<int> scope) -> Constraint;

        auto operator==(const Constraint &) const -> bool = default;
    };

    struct Instance
    {
        int step_count = 0;
        int user_count = 0;
        std::vector<StepSet> auth;            // auth[u] = steps user u may perform
        std::vector<Constraint> constraints;

        auto all_steps() const -> StepSet;

        // Checks the type invariants (ranges, scope arities, duplicate scopes
        // within a constraint family); throws StructuralError on violation.
        auto validate() const -> void;

        auto operator==(const Instance &) const -> bool = default;
    };

    // Partial map step -> user; -1 marks unassigned steps.
    struct Plan
    {
        std::vector<int> user_of_step;

        static auto empty(int step_count) -> Plan;

        auto domain() const -> StepSet;
        auto complete() const -> bool;

        auto operator==(const Plan &) const -> bool = default;
    };

    // Partition of a step subset into non-empty disjoint blocks. Canonical
    // form orders blocks by smallest contained step, enabling equality tests.
    struct Pattern
    {
        std::vector<StepSet> blocks;

        auto covered() const -> StepSet;
        auto canonicalize() -> void;

        auto operator==(const Pattern &) const -> bool = default;
    };

    struct Violation
    {
        bool is_authorisation;        // else a constraint violation
        int step = -1, user = -1;     // authorisation case
        int constraint_index = -1;    // constraint case

        auto describe(const Instance & inst) const -> std::string;
    };

    struct Verdict
    {
        bool authorised = true;
        bool eligible = true;
        std::vector<Violation> violations;

        auto valid() const -> bool { return authorised && eligible; }
    };

    // A constraint is checked only when its whole scope lies inside the plan's
    // domain; satisfaction is evaluated by definition (distinct-user counts).
    auto constraint_satisfied(const Constraint & c, const Plan & plan) -> bool;

    auto verify_plan(const Instance & inst, const Plan & plan) -> Verdict;

    auto pattern_of_plan(const Plan & plan) -> Pattern;

    auto plans_equivalent(const Plan & p1, const Plan & p2) -> bool;

    struct MergeResult
    {
        Instance instance;
        std::vector<int> step_map;    // original step -> merged step
        bool trivially_unsat = false;
    };

    // Merges steps joined by the transitive closure of Equals constraints and
    // rewrites every other constraint through the merge map. The merged
    // instance carries no Equals constraints. Satisfiability is preserved;
    // contradictions (NotEquals across merged steps, AtLeast scopes shrunk
    // below r) surface as trivially_unsat.
    auto eliminate_equals(const Instance & inst) -> MergeResult;

    // Expands a plan on the merged instance back to the original steps.
    auto expand_plan(const Plan & merged_plan, const std::vector<int> & step_map) -> Plan;
}
