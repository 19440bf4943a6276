#pragma once

#include <wsp/core.hh>
#include <wsp/rng.hh>

#include <cstdint>

namespace wsp
{
    struct GenConfig
    {
        int k = 0;
        int n = 0;
        int e = 0;                // not-equals constraints
        int gamma = 0;            // at-most-3 count, and also at-least-3 count
        std::uint64_t seed = 0;

        auto validate() const -> void;   // throws ConfigError
    };

    struct Rational
    {
        long long num = 0, den = 1;

        auto value() const -> double { return double(num) / double(den); }
    };

    // Largest authorisation list size the generator draws. The cap is
    // floor((k-1)/2) so a step has n/4 authorised users on average, exactly
    // so for even k; odd k shares the cap of the even k below it.
    auto auth_size_cap(int k) -> int;

    // WIG(k, n, e, gamma): per user, |A(u)| uniform on {1..auth_size_cap(k)}
    // and A(u) uniform without repetition; e distinct not-equals pairs; gamma
    // distinct at-most-3 and gamma distinct at-least-3 constraints on uniform
    // 5-scopes. Constraint list order is at-most, at-least, not-equals: the
    // not-equals stream is drawn last, so at a fixed seed raising e extends
    // the instance without disturbing authorisations or counting scopes.
    auto generate(const GenConfig & cfg) -> Instance;

    // Expected fraction of users authorised for a fixed step,
    // mean|A(u)| / k = (auth_size_cap(k)+1) / (2k); tends to 1/4.
    auto expected_auth_fraction(int k) -> Rational;
}
