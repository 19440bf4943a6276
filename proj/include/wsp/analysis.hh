#pragma once

#include <wsp/core.hh>

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <vector>

namespace wsp
{
    // Signed magnitude in the natural-log domain, so falling factorials like
    // P(10^6, 18) stay representable through intermediate products.
    struct LogNumber
    {
        int sign = 0;         // -1, 0, +1
        double log_mag = 0;   // ln |x|, meaningful only when sign != 0

        static auto zero() -> LogNumber { return {}; }
        static auto one() -> LogNumber { return {1, 0.0}; }
        static auto from_log(double lm) -> LogNumber { return {1, lm}; }
        static auto from_double(double x) -> LogNumber;

        auto to_double() const -> double;
        // scientific form like 2.800e-02, with the exponent computed in the
        // log domain so values beyond double range still print
        auto to_string(int significant_digits = 4) const -> std::string;

        auto operator*(const LogNumber & other) const -> LogNumber;
        auto operator+(const LogNumber & other) const -> LogNumber;
        auto operator<(const LogNumber & other) const -> bool;
    };

    // partitions of a q-set into exactly r non-empty blocks
    auto stirling2(int q, int r) -> boost::multiprecision::cpp_int;
    auto log_stirling2(int q, int r) -> double;   // -inf when the count is 0

    struct EstimateOptions
    {
        bool at_most_factor = true;    // include the at-most-3 eligibility factor
        bool at_least_factor = true;   // include the at-least-3 eligibility factor
        // raise each counting-family factor to gamma separately instead of
        // raising their product; algebraically identical, kept for
        // cross-checking the report
        bool two_factor = false;
        double auth_prob = 0.25;   // per-step authorisation probability
    };

    // probability that a random q-scope meets exactly r distinct blocks of a
    // uniform random b-block assignment
    auto p_block_hit(int q, int r, int b) -> double;

    // expected number of eligible patterns with exactly b blocks, for random
    // instances with e not-equals and gamma at-most-3 + gamma at-least-3
    // constraints on 5-scopes
    auto expected_eligible_patterns(int k, double e, double gamma, int b,
            const EstimateOptions & opts = {}) -> LogNumber;

    // probability that a pattern with b blocks is authorised
    auto p_auth_pattern(int k, int n, int b, double auth_prob = 0.25) -> double;

    // expected number of complete valid plans; blocks range over 3..k when
    // gamma > 0 (patterns with fewer blocks cannot meet an at-least-3
    // constraint) and 1..k otherwise
    auto expected_valid_plans(int k, int n, double e, double gamma,
            const EstimateOptions & opts = {}) -> LogNumber;

    // satisfiability probability estimate: per-b p_sat(b) combined as
    // 1 - prod_b (1 - p_sat(b))
    auto p_sat(int k, int n, double e, double gamma,
            const EstimateOptions & opts = {}) -> double;

    // the e at which p_sat crosses 0.5, by bisection over real e
    auto predict_e50(int k, int n, double gamma,
            const EstimateOptions & opts = {}) -> double;

    // empirically measured e50(k, 10k, k) values backing predict_beta(k);
    // measured with this toolkit's own generator and solver (the per-value
    // comments in the implementation record each measurement's seed, sample
    // count, and any per-solve time cap)
    auto stored_e50(int k) -> std::optional<double>;

    // the beta solving p_sat(k, 10k, beta * e50, beta * k) = 0.5
    auto predict_beta(int k, double e50_empirical) -> double;
    auto predict_beta(int k) -> double;   // uses stored_e50; throws if absent

    struct AnnealedRow
    {
        int b;
        double p_not_equals;   // per-constraint pass probability, 1 - 1/b
        double p_at_most;      // at-most-3 per-constraint pass probability
        double p_at_least;     // at-least-3 per-constraint pass probability
        LogNumber n_eligible;
        LogNumber auth_plans_per_pattern;   // P(n,b) * auth_prob^k
        LogNumber n_valid;
        double p_auth_pattern;
        double p_sat_b;
    };

    struct AnnealedReport
    {
        int k, n;
        double e, gamma;
        std::vector<AnnealedRow> rows;
        LogNumber total_eligible;
        LogNumber total_valid;
        double p_sat_total;
    };

    auto annealed_report(int k, int n, double e, double gamma,
            const EstimateOptions & opts = {}) -> AnnealedReport;

    auto to_csv(const AnnealedReport & report) -> std::string;
}
