#pragma once

#include <wsp/core.hh>

#include <string>

namespace wsp
{
    // Text format, all ids 0-based:
    //
    //   wsp 1
    //   k 5
    //   n 6
    //   auth:
    //   u0: s2
    //   ...
    //   constraints:
    //   sod s1 s2
    //   bod s0 s1
    //   atmost 3 s0 s1 s2 s3 s4
    //   atleast 3 s0 s1 s2 s3 s4
    //   threshold 1 2 s0 s1 s2
    //
    // sod is a not-equals constraint, bod an equals constraint. The writer
    // produces the canonical form: users ascending, scope ids ascending,
    // constraints in instance order, LF line endings.
    auto write_instance(const Instance & inst) -> std::string;
    auto parse_instance(const std::string & text) -> Instance;

    struct SolutionText
    {
        bool sat = false;
        Plan plan = Plan::empty(0);
    };

    // "SAT" followed by one "s<i> -> u<j>" line per step, or just "UNSAT"
    auto write_solution(const Plan & plan) -> std::string;
    auto write_solution_unsat() -> std::string;
    auto parse_solution(const std::string & text, int step_count) -> SolutionText;
}
