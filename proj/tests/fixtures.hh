#pragma once

#include <wsp/core.hh>

namespace wsp::fixtures
{
    // Five-step purchase-order workflow used throughout the tests: an equals
    // pair, four not-equals pairs, six users with small authorisation lists.
    // Valid plans exist (9 of them); the all-singletons pattern over
    // {s0,s1},{s2},{s3},{s4} is eligible but unauthorised.
    inline auto worked_example() -> Instance
    {
        Instance inst;
        inst.step_count = 5;
        inst.user_count = 6;
        inst.auth = {
            step_bit(2),
            step_bit(1),
            step_bit(0) | step_bit(1) | step_bit(3) | step_bit(4),
            step_bit(0),
            step_bit(2) | step_bit(3) | step_bit(4),
            step_bit(0) | step_bit(2),
        };
        inst.constraints = {
            Constraint::equals(0, 1),
            Constraint::not_equals(1, 2),
            Constraint::not_equals(0, 2),
            Constraint::not_equals(2, 3),
            Constraint::not_equals(2, 4),
        };
        return inst;
    }

    // Same workflow with the equals pair already merged away by hand:
    // m0 = {s0,s1}, m1 = s2, m2 = s3, m3 = s4.
    inline auto worked_example_merged() -> Instance
    {
        Instance inst;
        inst.step_count = 4;
        inst.user_count = 6;
        inst.auth = {
            step_bit(1),
            0,
            step_bit(0) | step_bit(2) | step_bit(3),
            0,
            step_bit(1) | step_bit(2) | step_bit(3),
            step_bit(1),
        };
        inst.constraints = {
            Constraint::not_equals(0, 1),
            Constraint::not_equals(1, 2),
            Constraint::not_equals(1, 3),
        };
        return inst;
    }

    // k fully-authorised steps, m users, no constraints.
    inline auto unconstrained(int k, int m) -> Instance
    {
        Instance inst;
        inst.step_count = k;
        inst.user_count = m;
        StepSet all = k == max_steps ? ~StepSet{0} : (StepSet{1} << k) - 1;
        inst.auth.assign(m, all);
        return inst;
    }
}
