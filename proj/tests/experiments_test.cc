#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hh"
#include "oracle.hh"

#include <wsp/experiments.hh>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

using namespace wsp;

TEST_CASE("percentiles interpolate linearly on the sorted sample")
{
    std::vector<double> xs{4, 1, 3, 2};
    CHECK(percentile(xs, 0) == 1.0);
    CHECK(percentile(xs, 50) == doctest::Approx(2.5));
    CHECK(percentile(xs, 100) == 4.0);
    CHECK(percentile(xs, 25) == doctest::Approx(1.75));
    CHECK(percentile({5}, 35) == 5.0);

    CHECK_THROWS_AS(percentile({}, 50), ConfigError);
    CHECK_THROWS_AS(percentile({1, 2}, 101), ConfigError);

    auto p = percentiles_of({10, 20, 30, 40, 50});
    CHECK(p.p25 == doctest::Approx(20.0));
    CHECK(p.p50 == doctest::Approx(30.0));
    CHECK(p.p75 == doctest::Approx(40.0));
    CHECK(std::isnan(percentiles_of({}).p50));
}

TEST_CASE("least squares recovers exact lines and scores noise honestly")
{
    auto fit = least_squares_fit({1, 2, 3, 4}, {3, 5, 7, 9});
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));
    CHECK(fit.r_squared == doctest::Approx(1.0));

    auto noisy = least_squares_fit({1, 2, 3, 4, 5}, {2.1, 3.9, 6.3, 7.6, 10.4});
    CHECK(noisy.r_squared > 0.97);
    CHECK(noisy.r_squared < 1.0);

    auto flat = least_squares_fit({1, 2, 3}, {4, 4, 4});
    CHECK(flat.slope == doctest::Approx(0.0));
    CHECK(flat.r_squared == doctest::Approx(1.0));

    CHECK_THROWS_AS(least_squares_fit({1}, {2}), ConfigError);
    CHECK_THROWS_AS(least_squares_fit({2, 2, 2}, {1, 2, 3}), ConfigError);
    CHECK_THROWS_AS(least_squares_fit({1, 2}, {1, 2, 3}), ConfigError);
}

TEST_CASE("batch solving is oblivious to the worker count")
{
    std::vector<GenConfig> cfgs;
    for (int rep = 0; rep < 12; ++rep)
        cfgs.push_back(GenConfig{10, 25, 20 + rep, 1, 9000 + std::uint64_t(rep)});

    auto serial = solve_batch(cfgs, {}, 1);
    auto parallel = solve_batch(cfgs, {}, 3);
    REQUIRE(serial.size() == cfgs.size());
    REQUIRE(parallel.size() == cfgs.size());
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        CHECK(serial[i].verdict == parallel[i].verdict);
        CHECK(serial[i].nodes == parallel[i].nodes);
    }

    SUBCASE("timeouts surface as their own verdict") {
        SolveOptions tight;
        tight.timeout_ms = 1;
        std::vector<GenConfig> hard(2, GenConfig{32, 320, 56, 32, 5});
        for (const auto & o : solve_batch(hard, tight, 1))
            CHECK(o.verdict == SolveVerdict::TimedOut);
    }
    SUBCASE("bad configs fail before any work starts") {
        CHECK_THROWS_AS(solve_batch({GenConfig{1, 5, 0, 0, 1}}, {}, 2), ConfigError);
    }
}

TEST_CASE("the transition search brackets and refines the crossing")
{
    auto res = find_e50(12, 30, 2, 30, 777);
    CHECK(res.e50 == 37);
    CHECK(res.k == 12);
    CHECK(res.samples_per_point == 30);

    // the curve is the probe log: ascending, deduplicated, and it must
    // bracket the estimate with a satisfiable side and an unsatisfiable side
    REQUIRE(res.curve.size() > 4);
    double frac_at_e50 = -1;
    for (std::size_t i = 0; i < res.curve.size(); ++i) {
        if (i > 0)
            CHECK(res.curve[i - 1].e < res.curve[i].e);
        CHECK(res.curve[i].samples == 30);
        if (res.curve[i].e == res.e50)
            frac_at_e50 = res.curve[i].fraction;
    }
    CHECK(res.curve.front().fraction >= 0.5);
    CHECK(res.curve.back().fraction <= 0.5);
    REQUIRE(frac_at_e50 >= 0);
    for (const auto & point : res.curve)
        CHECK(std::abs(point.fraction - 0.5) >= std::abs(frac_at_e50 - 0.5));

    SUBCASE("the search is deterministic") {
        auto again = find_e50(12, 30, 2, 30, 777);
        CHECK(again.e50 == res.e50);
        CHECK(to_csv(again) == to_csv(res));
    }
}

TEST_CASE("the transition search refuses flat instances honestly")
{
    // six users cannot reliably cover six steps even with no constraints
    CHECK_THROWS_AS(find_e50(6, 6, 0, 30, 777), ConfigError);
    // twenty users over ten steps stay satisfiable at the not-equals maximum
    CHECK_THROWS_AS(find_e50(10, 20, 0, 30, 777), ConfigError);
    CHECK_THROWS_AS(find_e50(12, 30, 2, 10, 777), ConfigError);
}

TEST_CASE("slice rows account for every sample")
{
    ExperimentOptions opts;
    opts.e50_lookup = [] (int, int) { return 20; };

    auto rows = run_fixed_k_slice(10, {20, 40}, 24, 4321, opts);
    REQUIRE(rows.size() == 2);
    for (const auto & row : rows) {
        CHECK(row.k == 10);
        CHECK(row.e == 20);
        CHECK(row.gamma == 10);
        CHECK(row.samples == 24);
        CHECK(row.censored == 0);
        CHECK(row.sat_count >= 0);
        CHECK(row.sat_count <= 24);
        if (row.sat_count > 0) {
            CHECK(! std::isnan(row.sat_nodes.p50));
            CHECK(row.sat_nodes.p25 <= row.sat_nodes.p75);
        }
        if (row.sat_count < 24)
            CHECK(! std::isnan(row.unsat_nodes.p50));
    }
    CHECK(rows[0].n == 20);
    CHECK(rows[1].n == 40);

    CHECK_THROWS_AS(run_fixed_k_slice(10, {5}, 24, 4321, opts), ConfigError);

    SUBCASE("the varying-k runner maps n through the caller's rule") {
        ExperimentOptions small = opts;
        small.e50_lookup = [] (int k, int) { return k; };
        auto vk = run_vary_k_slice({6, 8}, [] (int k) { return 5 * k; }, 20, 99, small);
        REQUIRE(vk.size() == 2);
        CHECK(vk[0].k == 6);
        CHECK(vk[0].n == 30);
        CHECK(vk[0].e == 6);
        CHECK(vk[0].gamma == 6);
        CHECK(vk[1].k == 8);
        CHECK(vk[1].n == 40);
        CHECK(vk[1].e == 8);
    }
}

TEST_CASE("the beta sweep scales both constraint families")
{
    ExperimentOptions opts;
    opts.e50_lookup = [] (int k, int n) {
        CHECK(k == 10);
        CHECK(n == 100);
        return 20;
    };
    auto rows = run_beta_sweep(10, {0.8, 1.0, 1.2}, 20, 2024, opts);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].row.e == 16);
    CHECK(rows[0].row.gamma == 8);
    CHECK(rows[1].row.e == 20);
    CHECK(rows[1].row.gamma == 10);
    CHECK(rows[2].row.e == 24);
    CHECK(rows[2].row.gamma == 12);
    for (const auto & row : rows)
        CHECK(row.row.n == 100);

    CHECK_THROWS_AS(run_beta_sweep(10, {9.0}, 20, 2024, opts), ConfigError);
}

TEST_CASE("the pair probe separates explicit, forced and free pairs")
{
    auto inst = fixtures::worked_example();
    auto report = forced_m_probe(inst);

    // classify every pair against the full valid-plan enumeration
    auto plans = oracle::all_valid_plans(inst);
    REQUIRE(! plans.empty());
    std::set<std::pair<int, int>> explicit_ne;
    for (const auto & c : inst.constraints)
        if (c.kind == ConstraintKind::NotEquals)
            explicit_ne.emplace(c.scope[0], c.scope[1]);

    int want_equal = 0, want_unequal = 0, want_free = 0;
    for (int i = 0; i < inst.step_count; ++i)
        for (int j = i + 1; j < inst.step_count; ++j) {
            if (explicit_ne.count({i, j}))
                continue;
            bool saw_same = false, saw_diff = false;
            for (const auto & plan : plans)
                (plan[std::size_t(i)] == plan[std::size_t(j)] ? saw_same : saw_diff) = true;
            if (! saw_diff)
                ++want_equal;
            else if (! saw_same)
                ++want_unequal;
            else
                ++want_free;
        }

    CHECK(report.explicit_pairs == int(explicit_ne.size()));
    CHECK(report.forced_equal == want_equal);
    CHECK(report.forced_unequal == want_unequal);
    CHECK(report.free_pairs == want_free);

    // the workflow pins one pair through its equals constraint
    CHECK(report.explicit_pairs == 4);
    CHECK(report.forced_equal == 1);
    CHECK(report.forced_unequal == 0);
    CHECK(report.free_pairs == 5);

    SUBCASE("unsatisfiable instances are refused") {
        Instance unsat = fixtures::unconstrained(3, 1);
        unsat.constraints = {Constraint::not_equals(0, 1)};
        CHECK_THROWS_AS(forced_m_probe(unsat), ConfigError);
    }
}

TEST_CASE("csv output keeps rows aligned with the headers")
{
    SliceRow row;
    row.k = 7;
    row.n = 70;
    row.e = 12;
    row.gamma = 7;
    row.samples = 50;
    row.sat_count = 30;
    row.censored = 2;
    row.sat_time_ms = {1, 2, 3, 4, 5};
    row.unsat_time_ms = percentiles_of({});
    row.sat_nodes = {10, 20, 30, 40, 50};
    row.unsat_nodes = percentiles_of({});

    auto header = slice_csv_header();
    auto cells = to_csv_row(row);
    auto commas = [] (const std::string & s) {
        return std::count(s.begin(), s.end(), ',');
    };
    CHECK(commas(header) == commas(cells));
    CHECK(cells.rfind("7,70,12,7,50,30,2,", 0) == 0);
    CHECK(cells.find("na") != std::string::npos);

    ForcedReport fr;
    fr.instance_id = "w5";
    fr.beta = 1.0;
    fr.forced_equal = 1;
    fr.free_pairs = 5;
    fr.explicit_pairs = 4;
    CHECK(commas(forced_csv_header()) == commas(to_csv_row(fr)));
    CHECK(to_csv_row(fr) == "w5,1,1,0,5,4");

    CHECK(plot_csv({{1, 2, 0.5, 3.5}}) == "x,y,lo,hi\n1,2,0.5,3.5\n");
}
