#include <wsp/experiments.hh>
#include <wsp/rng.hh>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <thread>

namespace wsp
{
    namespace
    {
        constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

        auto fmt(double x) -> std::string
        {
            if (std::isnan(x))
                return "na";
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.6g", x);
            return buf;
        }
    }

    auto percentile(std::vector<double> xs, double p) -> double
    {
        if (xs.empty())
            throw ConfigError{"percentile of an empty sample"};
        if (p < 0 || p > 100)
            throw ConfigError{"percentile rank must be within 0..100"};
        std::sort(xs.begin(), xs.end());
        auto h = p / 100 * (static_cast<double>(xs.size()) - 1);
        auto lo = static_cast<std::size_t>(h);
        if (lo + 1 >= xs.size())
            return xs.back();
        auto frac = h - static_cast<double>(lo);
        return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
    }

    auto percentiles_of(const std::vector<double> & xs) -> Percentiles
    {
        if (xs.empty())
            return {nan_value, nan_value, nan_value, nan_value, nan_value};
        return {percentile(xs, 25), percentile(xs, 35), percentile(xs, 50),
                percentile(xs, 65), percentile(xs, 75)};
    }

    auto solve_batch(const std::vector<GenConfig> & cfgs, const SolveOptions & sopts,
            int workers) -> std::vector<BatchOutcome>
    {
        for (const auto & cfg : cfgs)
            cfg.validate();   // fail before any thread starts

        std::vector<BatchOutcome> out(cfgs.size());
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (;;) {
                auto i = next.fetch_add(1);
                if (i >= cfgs.size())
                    break;
                auto inst = generate(cfgs[i]);
                auto res = solve(inst, sopts);
                out[i] = BatchOutcome{res.verdict, res.stats.nodes, res.wall_ms};
            }
        };

        if (workers <= 1)
            work();
        else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w)
                pool.emplace_back(work);
            for (auto & t : pool)
                t.join();
        }
        return out;
    }

    namespace
    {
        struct FractionProbe
        {
            int k, n, gamma, samples;
            std::uint64_t master;
            const ExperimentOptions & opts;
            std::map<int, E50Point> probed;

            auto fraction(int e) -> double
            {
                auto it = probed.find(e);
                if (it != probed.end())
                    return it->second.fraction;

                std::vector<GenConfig> cfgs;
                for (int rep = 0; rep < samples; ++rep)
                    cfgs.push_back(GenConfig{k, n, e, gamma,
                            derive_seed(master, {static_cast<std::uint64_t>(k),
                                    static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(e),
                                    static_cast<std::uint64_t>(gamma),
                                    static_cast<std::uint64_t>(rep)})});
                auto outcomes = solve_batch(cfgs, opts.solve, opts.workers);

                int sat = 0, done = 0;
                for (const auto & o : outcomes) {
                    if (o.verdict == SolveVerdict::TimedOut)
                        continue;
                    ++done;
                    sat += o.verdict == SolveVerdict::Sat ? 1 : 0;
                }
                if (done == 0)
                    throw ConfigError{"every solve at e = " + std::to_string(e) + " timed out"};
                auto f = static_cast<double>(sat) / done;
                probed.emplace(e, E50Point{e, f, done});
                return f;
            }
        };
    }

    auto find_e50(int k, int n, int gamma, int samples, std::uint64_t seed,
            const ExperimentOptions & opts) -> E50Result
    {
        if (samples < 20)
            throw ConfigError{"the e50 search needs at least 20 samples per probed e"};
        GenConfig{k, n, 0, gamma, seed}.validate();

        auto e_max = k * (k - 1) / 2;
        auto step = std::max(1, e_max / 20);   // k(k-1)/40
        FractionProbe probe{k, n, gamma, samples, seed, opts, {}};

        if (probe.fraction(0) < 0.5)
            throw ConfigError{"no transition: sat fraction is below 0.5 already at e = 0"};

        int lo = 0, hi = -1;
        for (auto e = step; e <= e_max; e += step)
            if (probe.fraction(e) < 0.5) {
                hi = e;
                break;
            }
            else
                lo = e;
        if (hi < 0) {
            if (lo < e_max && probe.fraction(e_max) < 0.5)
                hi = e_max;
            else
                throw ConfigError{"no transition: still satisfiable at the not-equals maximum"};
        }

        while (hi - lo > 1) {
            auto mid = lo + (hi - lo) / 2;
            (probe.fraction(mid) >= 0.5 ? lo : hi) = mid;
        }

        E50Result result;
        result.k = k;
        result.n = n;
        result.gamma = gamma;
        result.samples_per_point = samples;
        auto best_gap = std::numeric_limits<double>::infinity();
        result.e50 = 0;
        for (const auto & [e, point] : probe.probed) {
            result.curve.push_back(point);
            auto gap = std::abs(point.fraction - 0.5);
            if (gap < best_gap) {
                best_gap = gap;
                result.e50 = e;
            }
        }
        return result;
    }

    namespace
    {
        auto make_slice_row(int k, int n, int e, int gamma, int samples, std::uint64_t seed,
                const ExperimentOptions & opts) -> SliceRow
        {
            std::vector<GenConfig> cfgs;
            for (int rep = 0; rep < samples; ++rep)
                cfgs.push_back(GenConfig{k, n, e, gamma,
                        derive_seed(seed, {static_cast<std::uint64_t>(k),
                                static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(e),
                                static_cast<std::uint64_t>(gamma),
                                static_cast<std::uint64_t>(rep)})});
            auto outcomes = solve_batch(cfgs, opts.solve, opts.workers);

            SliceRow row;
            row.k = k;
            row.n = n;
            row.e = e;
            row.gamma = gamma;
            row.samples = samples;
            row.sat_count = 0;
            row.censored = 0;

            std::vector<double> sat_time, unsat_time, sat_nodes, unsat_nodes;
            for (const auto & o : outcomes)
                switch (o.verdict) {
                    case SolveVerdict::Sat:
                        ++row.sat_count;
                        sat_time.push_back(o.wall_ms);
                        sat_nodes.push_back(static_cast<double>(o.nodes));
                        break;
                    case SolveVerdict::Unsat:
                        unsat_time.push_back(o.wall_ms);
                        unsat_nodes.push_back(static_cast<double>(o.nodes));
                        break;
                    case SolveVerdict::TimedOut:
                        ++row.censored;
                        break;
                }

            row.sat_time_ms = percentiles_of(sat_time);
            row.unsat_time_ms = percentiles_of(unsat_time);
            row.sat_nodes = percentiles_of(sat_nodes);
            row.unsat_nodes = percentiles_of(unsat_nodes);
            return row;
        }

        auto e50_for(int k, int n, std::uint64_t seed, const ExperimentOptions & opts) -> int
        {
            if (opts.e50_lookup)
                return opts.e50_lookup(k, n);
            return find_e50(k, n, k, opts.e50_samples, seed, opts).e50;
        }
    }

    auto run_vary_k_slice(const std::vector<int> & ks, const std::function<int(int)> & n_of_k,
            int samples, std::uint64_t seed, const ExperimentOptions & opts) -> std::vector<SliceRow>
    {
        std::vector<SliceRow> rows;
        for (auto k : ks) {
            auto n = n_of_k(k);
            auto e50 = e50_for(k, n, seed, opts);
            rows.push_back(make_slice_row(k, n, e50, k, samples, seed, opts));
        }
        return rows;
    }

    auto run_fixed_k_slice(int k, const std::vector<int> & ns, int samples, std::uint64_t seed,
            const ExperimentOptions & opts) -> std::vector<SliceRow>
    {
        for (auto n : ns)
            if (n < k)
                throw ConfigError{"fixed-k slice needs n >= k"};

        std::vector<SliceRow> rows;
        for (auto n : ns) {
            auto e50 = e50_for(k, n, seed, opts);
            rows.push_back(make_slice_row(k, n, e50, k, samples, seed, opts));
        }
        return rows;
    }

    auto run_beta_sweep(int k, const std::vector<double> & betas, int samples, std::uint64_t seed,
            const ExperimentOptions & opts) -> std::vector<BetaRow>
    {
        auto n = 10 * k;
        auto e50 = e50_for(k, n, seed, opts);
        auto e_max = k * (k - 1) / 2;

        std::vector<BetaRow> rows;
        for (auto beta : betas) {
            auto e = static_cast<int>(std::llround(beta * e50));
            auto gamma = static_cast<int>(std::llround(beta * k));
            if (e < 0 || e > e_max)
                throw ConfigError{"beta moves e outside the feasible range"};
            rows.push_back(BetaRow{beta, make_slice_row(k, n, e, gamma, samples, seed, opts)});
        }
        return rows;
    }

    auto forced_m_probe(const Instance & inst, const SolveOptions & sopts) -> ForcedReport
    {
        auto verdict_with = [&] (const Instance & probe) {
            auto merged = eliminate_equals(probe);
            if (merged.trivially_unsat)
                return SolveVerdict::Unsat;
            auto res = solve(merged.instance, sopts);
            if (res.verdict == SolveVerdict::TimedOut)
                throw ConfigError{"a forced-variable probe solve timed out"};
            return res.verdict;
        };

        if (verdict_with(inst) != SolveVerdict::Sat)
            throw ConfigError{"the forced-variable probe is undefined on an unsatisfiable instance"};

        std::set<std::pair<int, int>> explicit_ne;
        for (const auto & c : inst.constraints)
            if (c.kind == ConstraintKind::NotEquals)
                explicit_ne.emplace(c.scope[0], c.scope[1]);

        ForcedReport report;
        for (int i = 0; i < inst.step_count; ++i)
            for (int j = i + 1; j < inst.step_count; ++j) {
                if (explicit_ne.count({i, j})) {
                    ++report.explicit_pairs;
                    continue;
                }

                auto with_equals = inst;
                with_equals.constraints.push_back(Constraint::equals(i, j));
                if (verdict_with(with_equals) == SolveVerdict::Unsat) {
                    ++report.forced_unequal;
                    continue;
                }

                auto with_not_equals = inst;
                with_not_equals.constraints.push_back(Constraint::not_equals(i, j));
                if (verdict_with(with_not_equals) == SolveVerdict::Unsat)
                    ++report.forced_equal;
                else
                    ++report.free_pairs;
            }
        return report;
    }

    auto least_squares_fit(const std::vector<double> & xs, const std::vector<double> & ys) -> FitResult
    {
        if (xs.size() != ys.size() || xs.size() < 2)
            throw ConfigError{"least squares needs two samples of equal length"};

        auto m = static_cast<double>(xs.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
        }
        auto denom = m * sxx - sx * sx;
        if (denom == 0)
            throw ConfigError{"least squares predictor is constant"};

        FitResult fit;
        fit.slope = (m * sxy - sx * sy) / denom;
        fit.intercept = (sy - fit.slope * sx) / m;

        double ss_res = 0, ss_tot = 0;
        auto mean_y = sy / m;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            auto pred = fit.slope * xs[i] + fit.intercept;
            ss_res += (ys[i] - pred) * (ys[i] - pred);
            ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
        }
        fit.r_squared = ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot;
        return fit;
    }

    namespace
    {
        auto percentile_columns(const std::string & prefix) -> std::string
        {
            std::string out;
            for (auto p : {"p25", "p35", "p50", "p65", "p75"})
                out += "," + prefix + "_" + p;
            return out;
        }

        auto percentile_cells(const Percentiles & p) -> std::string
        {
            return "," + fmt(p.p25) + "," + fmt(p.p35) + "," + fmt(p.p50)
                    + "," + fmt(p.p65) + "," + fmt(p.p75);
        }
    }

    auto slice_csv_header() -> std::string
    {
        return "k,n,e,gamma,samples,sat,censored"
                + percentile_columns("sat_time_ms") + percentile_columns("unsat_time_ms")
                + percentile_columns("sat_nodes") + percentile_columns("unsat_nodes");
    }

    auto to_csv_row(const SliceRow & row) -> std::string
    {
        return std::to_string(row.k) + "," + std::to_string(row.n) + "," + std::to_string(row.e)
                + "," + std::to_string(row.gamma) + "," + std::to_string(row.samples)
                + "," + std::to_string(row.sat_count) + "," + std::to_string(row.censored)
                + percentile_cells(row.sat_time_ms) + percentile_cells(row.unsat_time_ms)
                + percentile_cells(row.sat_nodes) + percentile_cells(row.unsat_nodes);
    }

    auto to_csv(const std::vector<SliceRow> & rows) -> std::string
    {
        auto out = slice_csv_header() + "\n";
        for (const auto & row : rows)
            out += to_csv_row(row) + "\n";
        return out;
    }

    auto to_csv(const E50Result & result) -> std::string
    {
        std::string out = "e,fraction,samples\n";
        for (const auto & point : result.curve)
            out += std::to_string(point.e) + "," + fmt(point.fraction) + ","
                    + std::to_string(point.samples) + "\n";
        return out;
    }

    auto to_csv(const std::vector<BetaRow> & rows) -> std::string
    {
        auto out = "beta," + slice_csv_header() + "\n";
        for (const auto & row : rows)
            out += fmt(row.beta) + "," + to_csv_row(row.row) + "\n";
        return out;
    }

    auto forced_csv_header() -> std::string
    {
        return "instance,beta,forced_equal,forced_unequal,free,explicit";
    }

    auto to_csv_row(const ForcedReport & report) -> std::string
    {
        return report.instance_id + "," + fmt(report.beta)
                + "," + std::to_string(report.forced_equal)
                + "," + std::to_string(report.forced_unequal)
                + "," + std::to_string(report.free_pairs)
                + "," + std::to_string(report.explicit_pairs);
    }

    auto plot_csv(const std::vector<std::array<double, 4>> & rows) -> std::string
    {
        std::string out = "x,y,lo,hi\n";
        for (const auto & row : rows)
            out += fmt(row[0]) + "," + fmt(row[1]) + "," + fmt(row[2]) + "," + fmt(row[3]) + "\n";
        return out;
    }
}
