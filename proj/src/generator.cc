#include <wsp/generator.hh>

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <vector>

using std::set;
using std::to_string;
using std::vector;

namespace wsp
{
    namespace
    {
        auto pairs_of(int k) -> long long
        {
            return (long long)(k) * (k - 1) / 2;
        }

        auto five_scopes_of(int k) -> long long
        {
            if (k < 5)
                return 0;
            long long c = 1;
            for (int i = 0; i < 5; ++i)
                c = c * (k - i) / (i + 1);
            return c;
        }

        // first `take` entries of a uniform permutation of 0..k-1
        auto sample_steps(Rng & rng, int k, int take, vector<int> & pool) -> void
        {
            pool.resize(k);
            std::iota(pool.begin(), pool.end(), 0);
            for (int i = 0; i < take; ++i)
                std::swap(pool[i], pool[i + int(rng.below(k - i))]);
            pool.resize(take);
        }
    }

    auto auth_size_cap(int k) -> int
    {
        return std::max(1, (k - 1) / 2);
    }

    auto GenConfig::validate() const -> void
    {
        if (k < 2 || k > max_steps)
            throw ConfigError{"k must be in 2.." + to_string(max_steps)};
        if (n < 1)
            throw ConfigError{"n must be positive"};
        if (e < 0 || e > pairs_of(k))
            throw ConfigError{"e exceeds the " + to_string(pairs_of(k)) + " distinct step pairs"};
        if (gamma < 0)
            throw ConfigError{"gamma must be non-negative"};
        if (gamma > 0 && k < 5)
            throw ConfigError{"gamma > 0 needs k >= 5 (scopes have 5 steps)"};
        if (gamma > five_scopes_of(k))
            throw ConfigError{"gamma exceeds the " + to_string(five_scopes_of(k)) + " distinct 5-scopes"};
    }

    auto generate(const GenConfig & cfg) -> Instance
    {
        cfg.validate();
        Rng rng{cfg.seed};

        Instance inst;
        inst.step_count = cfg.k;
        inst.user_count = cfg.n;
        inst.auth.reserve(cfg.n);

        vector<int> pool;
        for (int u = 0; u < cfg.n; ++u) {
            int size = 1 + int(rng.below(auth_size_cap(cfg.k)));
            sample_steps(rng, cfg.k, size, pool);
            StepSet a = 0;
            for (int s : pool)
                a |= step_bit(s);
            inst.auth.push_back(a);
        }

        for (auto kind : {ConstraintKind::AtMost, ConstraintKind::AtLeast}) {
            set<StepSet> seen;
            while (int(seen.size()) < cfg.gamma) {
                sample_steps(rng, cfg.k, 5, pool);
                std::sort(pool.begin(), pool.end());
                StepSet mask = 0;
                for (int s : pool)
                    mask |= step_bit(s);
                if (! seen.insert(mask).second)
                    continue;
                inst.constraints.push_back(kind == ConstraintKind::AtMost
                        ? Constraint::at_most(3, pool)
                        : Constraint::at_least(3, pool));
            }
        }

        set<std::pair<int, int>> seen_pairs;
        while (int(seen_pairs.size()) < cfg.e) {
            int i = int(rng.below(cfg.k));
            int j = int(rng.below(cfg.k - 1));
            if (j >= i)
                ++j;
            if (! seen_pairs.insert(std::minmax(i, j)).second)
                continue;
            inst.constraints.push_back(Constraint::not_equals(i, j));
        }

        return inst;
    }

    auto expected_auth_fraction(int k) -> Rational
    {
        if (k < 2)
            throw ConfigError{"expected_auth_fraction needs k >= 2"};
        long long m = auth_size_cap(k);
        long long num = m + 1, den = 2LL * k;
        long long g = std::gcd(num, den);
        return Rational{num / g, den / g};
    }
}
