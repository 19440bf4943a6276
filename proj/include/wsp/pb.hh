#pragma once

#include <wsp/core.hh>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace wsp
{
    struct DecodeError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    enum class VarKind
    {
        X,   // step s gets user u
        M,   // steps i < j share a block
        Y,   // user u may count towards an at-most scope
        Z,   // user u counts towards an at-least scope
        T    // position opens a new block within a counting scope
    };

    struct PBVar
    {
        VarKind kind;
        int a = -1;   // X: step; M: lower step; Y/Z: group; T: group
        int b = -1;   // X: user; M: higher step; Y/Z: user; T: position

        auto tag() const -> std::string;
        auto operator==(const PBVar &) const -> bool = default;
    };

    enum class PBRelation
    {
        Ge,
        Eq
    };

    struct PBTerm
    {
        long long coef;
        int var;   // index into the model catalogue

        auto operator==(const PBTerm &) const -> bool = default;
    };

    // Terms are kept sorted by variable with duplicates merged and zero
    // coefficients dropped.
    struct PBConstraint
    {
        std::vector<PBTerm> terms;
        PBRelation rel;
        long long rhs;

        auto operator==(const PBConstraint &) const -> bool = default;
    };

    struct PBModel
    {
        int step_count = 0;
        int user_count = 0;
        std::vector<PBVar> vars;
        std::vector<PBConstraint> constraints;
        std::vector<std::string> notes;   // one per constraint, not emitted
        std::string instance_text;        // canonical source instance, if known

        auto add_var(PBVar v) -> int;
        auto add_constraint(std::vector<PBTerm> terms, PBRelation rel, long long rhs,
                std::string note) -> void;

        auto find_var(const PBVar & v) const -> int;            // -1 when absent
        auto x_var(int step, int user) const -> int;            // -1 when unauthorised
        auto m_var(int step_i, int step_j) const -> int;        // either orientation
        auto next_group() -> int;                               // y/z/t group ids

        auto operator==(const PBModel & other) const -> bool
        {
            return step_count == other.step_count && user_count == other.user_count
                    && vars == other.vars && constraints == other.constraints;
        }

    private:
        int group_counter_ = 0;
        // lookup index over vars, rebuilt lazily after parses and copies
        mutable std::map<std::tuple<int, int, int>, int> index_;
        mutable std::size_t indexed_count_ = 0;
    };

    enum class CountingMode
    {
        Edges,   // edge-sum bounds for at-most-3/at-least-3 on 5-scopes
        TVars    // t-variable encodings for every counting constraint
    };

    struct EncodeOptions
    {
        CountingMode counting = CountingMode::Edges;
    };

    // One-hot user choice per step over authorised users only, with
    // constraints expressed directly on the x variables.
    auto encode_udpb(const Instance & inst) -> PBModel;

    // Pattern-based formulation: M variables for every step pair,
    // transitivity, x-M links, and constraints expressed on M.
    auto encode_pbpb(const Instance & inst, const EncodeOptions & opts = {}) -> PBModel;

    // Forbid exactly this pattern on the steps it covers.
    auto exclude_pattern(PBModel & model, const Pattern & pat) -> void;

    struct EdgeBounds
    {
        long long lo, hi;
        // true when the per-r intervals for this scope size overlap, so an
        // edge count does not determine the block count
        bool range_overlap;
    };

    // min/max within-block pair count over partitions of q elements into
    // exactly r blocks; q <= 6 (larger scopes use the general encoders)
    auto edge_bounds(int q, int r) -> EdgeBounds;

    // at-most-r as independent-set exclusion: every (r+1)-subset of the scope
    // contains a same-block pair
    auto encode_atmost_general(PBModel & model, int r, const std::vector<int> & scope) -> void;

    // at-least-r over cyclic-order-distinct permutations of the scope; exact
    // for r >= 2, vacuous (nothing emitted) for r <= 1; scopes above 8 steps
    // are refused
    auto encode_atleast_general_perm(PBModel & model, int r, const std::vector<int> & scope) -> void;

    // block-counting t variables: t_i says scope position i opens a new block
    auto encode_counting_tvars(PBModel & model, ConstraintKind kind, int r,
            const std::vector<int> & scope) -> void;

    // clique-size bounds t_lo <= |block of s| <= t_hi per scope step, with
    // the step's own diagonal contribution folded into the right-hand side
    auto encode_threshold(PBModel & model, int t_lo, int t_hi, const std::vector<int> & scope) -> void;

    // OPB text: `* #variable= V #constraint= C` header, `* map <id> <tag>`
    // catalogue comments, `* inst <line>` source echo, then one constraint
    // per line; byte-stable
    auto emit_opb(const PBModel & model) -> std::string;
    auto parse_opb(const std::string & text) -> PBModel;

    struct DecodedSolution
    {
        Plan plan = Plan::empty(0);
        std::optional<Pattern> pattern;
    };

    // plan from the x variables (exactly one per step), pattern from the M
    // variables when present
    auto decode_solution(const PBModel & model, const std::vector<char> & values) -> DecodedSolution;

    struct PbSolverOutput
    {
        bool unsat = false;
        std::vector<std::pair<int, bool>> values;   // (1-based var id, value)
    };

    // reader for the usual PB solver output: `v ±x<N>` token lines, possibly
    // split across lines, and `s UNSATISFIABLE`
    auto parse_pb_solution(const std::string & text) -> PbSolverOutput;

    // exhaustive enumeration of satisfying assignments for tiny models, with
    // interval propagation; assignments indexed by catalogue position
    auto enumerate_assignments(const PBModel & model,
            std::size_t limit = static_cast<std::size_t>(-1)) -> std::vector<std::vector<char>>;
    auto first_assignment(const PBModel & model) -> std::optional<std::vector<char>>;
}
