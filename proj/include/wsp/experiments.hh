#pragma once

#include <wsp/core.hh>
#include <wsp/generator.hh>
#include <wsp/solver.hh>

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace wsp
{
    // linear interpolation on the sorted sample: index p/100 * (n-1)
    auto percentile(std::vector<double> xs, double p) -> double;

    struct Percentiles
    {
        double p25, p35, p50, p65, p75;
    };

    // NaN-filled when the sample is empty
    auto percentiles_of(const std::vector<double> & xs) -> Percentiles;

    struct BatchOutcome
    {
        SolveVerdict verdict = SolveVerdict::Unsat;
        std::uint64_t nodes = 0;
        double wall_ms = 0;
    };

    // generate and solve one instance per config, fanned out over workers;
    // results are indexed like the input regardless of scheduling
    auto solve_batch(const std::vector<GenConfig> & cfgs, const SolveOptions & sopts,
            int workers) -> std::vector<BatchOutcome>;

    struct ExperimentOptions
    {
        SolveOptions solve;
        int workers = 1;
        int e50_samples = 100;
        // override for the e50 measurements (e.g. a cached value); when
        // unset, runners measure it themselves
        std::function<int(int k, int n)> e50_lookup;
    };

    struct E50Point
    {
        int e;
        double fraction;
        int samples;
    };

    struct E50Result
    {
        int k, n, gamma;
        int e50;
        std::vector<E50Point> curve;   // every probed e, ascending
        int samples_per_point;
    };

    // coarse scan in steps of max(1, k(k-1)/40), then bisection between the
    // bracketing probes; the estimate is the probed e whose sat fraction is
    // nearest 0.5, ties to the smaller e
    auto find_e50(int k, int n, int gamma, int samples, std::uint64_t seed,
            const ExperimentOptions & opts = {}) -> E50Result;

    struct SliceRow
    {
        int k, n, e, gamma;
        int samples, sat_count, censored;
        Percentiles sat_time_ms, unsat_time_ms, sat_nodes, unsat_nodes;
    };

    auto run_vary_k_slice(const std::vector<int> & ks, const std::function<int(int)> & n_of_k,
            int samples, std::uint64_t seed, const ExperimentOptions & opts = {})
            -> std::vector<SliceRow>;

    auto run_fixed_k_slice(int k, const std::vector<int> & ns, int samples, std::uint64_t seed,
            const ExperimentOptions & opts = {}) -> std::vector<SliceRow>;

    struct BetaRow
    {
        double beta;
        SliceRow row;
    };

    // instances drawn at (round(beta * e50), round(beta * k))
    auto run_beta_sweep(int k, const std::vector<double> & betas, int samples, std::uint64_t seed,
            const ExperimentOptions & opts = {}) -> std::vector<BetaRow>;

    struct ForcedReport
    {
        std::string instance_id;   // caller-provided label
        double beta = 0;           // caller-provided context
        int forced_equal = 0;      // pair must share a user
        int forced_unequal = 0;    // pair must not share a user
        int free_pairs = 0;
        int explicit_pairs = 0;    // fixed by an explicit not-equals, not probed
    };

    // probes every unordered step pair: forced-unequal when adding an equals
    // constraint makes the instance unsatisfiable, forced-equal when adding a
    // not-equals does; each probe is an independent solve
    auto forced_m_probe(const Instance & inst, const SolveOptions & sopts = {}) -> ForcedReport;

    struct FitResult
    {
        double slope, intercept, r_squared;
    };

    auto least_squares_fit(const std::vector<double> & xs, const std::vector<double> & ys) -> FitResult;

    auto slice_csv_header() -> std::string;
    auto to_csv_row(const SliceRow & row) -> std::string;
    auto to_csv(const std::vector<SliceRow> & rows) -> std::string;
    auto to_csv(const E50Result & result) -> std::string;
    auto to_csv(const std::vector<BetaRow> & rows) -> std::string;
    auto forced_csv_header() -> std::string;
    auto to_csv_row(const ForcedReport & report) -> std::string;
    auto plot_csv(const std::vector<std::array<double, 4>> & rows) -> std::string;   // x,y,lo,hi
}
