#include <wsp/analysis.hh>

#include <cmath>
#include <cstdio>
#include <mutex>

namespace wsp
{
    namespace
    {
        constexpr double neg_inf = -std::numeric_limits<double>::infinity();

        auto safe_log(double x) -> double
        {
            return x > 0 ? std::log(x) : neg_inf;
        }

        auto clamp01(double x) -> double
        {
            return x < 0 ? 0.0 : x > 1 ? 1.0 : x;
        }

        // log of the falling factorial n(n-1)...(n-b+1)
        auto log_falling(int n, int b) -> double
        {
            if (b > n)
                return neg_inf;
            double acc = 0;
            for (int i = 0; i < b; ++i)
                acc += std::log(static_cast<double>(n - i));
            return acc;
        }
    }

    auto LogNumber::from_double(double x) -> LogNumber
    {
        if (x == 0)
            return zero();
        return {x > 0 ? 1 : -1, std::log(std::abs(x))};
    }

    auto LogNumber::to_double() const -> double
    {
        return sign == 0 ? 0.0 : sign * std::exp(log_mag);
    }

    auto LogNumber::to_string(int significant_digits) const -> std::string
    {
        if (sign == 0)
            return "0";
        auto log10_mag = log_mag / std::log(10.0);
        auto exp10 = std::floor(log10_mag);
        auto mantissa = std::pow(10.0, log10_mag - exp10);
        if (mantissa >= 10.0 - 0.5 * std::pow(10.0, 1 - significant_digits)) {
            mantissa /= 10.0;
            exp10 += 1;
        }
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%.*fe%+03d",
                sign < 0 ? "-" : "", significant_digits - 1, mantissa, static_cast<int>(exp10));
        return buf;
    }

    auto LogNumber::operator*(const LogNumber & other) const -> LogNumber
    {
        if (sign == 0 || other.sign == 0)
            return zero();
        return {sign * other.sign, log_mag + other.log_mag};
    }

    auto LogNumber::operator+(const LogNumber & other) const -> LogNumber
    {
        if (sign == 0)
            return other;
        if (other.sign == 0)
            return *this;

        const auto & big = log_mag >= other.log_mag ? *this : other;
        const auto & small = log_mag >= other.log_mag ? other : *this;
        auto delta = small.log_mag - big.log_mag;   // <= 0

        if (sign == other.sign)
            return {sign, big.log_mag + std::log1p(std::exp(delta))};
        if (delta == 0)
            return zero();
        return {big.sign, big.log_mag + std::log1p(-std::exp(delta))};
    }

    auto LogNumber::operator<(const LogNumber & other) const -> bool
    {
        if (sign != other.sign)
            return sign < other.sign;
        if (sign == 0)
            return false;
        return sign > 0 ? log_mag < other.log_mag : other.log_mag < log_mag;
    }

    namespace
    {
        constexpr int stirling_limit = 64;
        std::vector<std::vector<boost::multiprecision::cpp_int>> stirling_table;
        std::once_flag stirling_once;

        auto build_stirling_table() -> void
        {
            stirling_table.assign(stirling_limit + 1,
                    std::vector<boost::multiprecision::cpp_int>(stirling_limit + 1, 0));
            stirling_table[0][0] = 1;
            for (int n = 1; n <= stirling_limit; ++n)
                for (int r = 1; r <= n; ++r)
                    stirling_table[n][r] = r * stirling_table[n - 1][r] + stirling_table[n - 1][r - 1];
        }
    }

    auto stirling2(int q, int r) -> boost::multiprecision::cpp_int
    {
        if (q < 0 || q > stirling_limit || r < 0 || r > stirling_limit)
            throw ConfigError{"stirling2 arguments out of range"};
        std::call_once(stirling_once, build_stirling_table);
        return stirling_table[static_cast<std::size_t>(q)][static_cast<std::size_t>(r)];
    }

    auto log_stirling2(int q, int r) -> double
    {
        auto v = stirling2(q, r);
        if (v == 0)
            return neg_inf;
        return std::log(v.convert_to<double>());
    }

    auto p_block_hit(int q, int r, int b) -> double
    {
        if (q < 1 || r < 1 || b < 1)
            return 0;
        if (r > q || r > b)
            return 0;
        auto lg = log_stirling2(q, r);
        for (int i = 0; i < r; ++i)
            lg += std::log(static_cast<double>(b - i));
        lg -= q * std::log(static_cast<double>(b));
        return clamp01(std::exp(lg));
    }

    namespace
    {
        auto counting_pass_probs(int b) -> std::pair<double, double>
        {
            auto p1 = p_block_hit(5, 1, b);
            auto p2 = p_block_hit(5, 2, b);
            auto p3 = p_block_hit(5, 3, b);
            auto p_le = clamp01(p1 + p2 + p3);
            auto p_ge = clamp01(1.0 - p1 - p2);
            return {p_le, p_ge};
        }
    }

    auto expected_eligible_patterns(int k, double e, double gamma, int b,
            const EstimateOptions & opts) -> LogNumber
    {
        if (b < 1 || b > k)
            return LogNumber::zero();

        auto lg = log_stirling2(k, b);
        if (lg == neg_inf)
            return LogNumber::zero();

        if (e > 0)
            lg += e * std::log1p(-1.0 / b);   // -inf at b = 1

        if (gamma > 0) {
            auto [p_le, p_ge] = counting_pass_probs(b);
            if (! opts.at_most_factor)
                p_le = 1;
            if (! opts.at_least_factor)
                p_ge = 1;
            if (opts.two_factor)
                lg += gamma * safe_log(p_le) + gamma * safe_log(p_ge);
            else
                lg += gamma * safe_log(p_le * p_ge);
        }

        if (std::isinf(lg))
            return LogNumber::zero();
        return LogNumber::from_log(lg);
    }

    auto p_auth_pattern(int k, int n, int b, double auth_prob) -> double
    {
        if (b < 1)
            return 0;
        auto a = std::exp(static_cast<double>(k) / b * std::log(auth_prob));
        auto p_block = -std::expm1(n * std::log1p(-a));
        if (p_block <= 0)
            return 0;
        return clamp01(std::exp(b * std::log(p_block)));
    }

    namespace
    {
        auto block_range_low(double gamma) -> int
        {
            // patterns with fewer than 3 blocks cannot satisfy an at-least-3
            // constraint, so they are never eligible when gamma > 0
            return gamma > 0 ? 3 : 1;
        }

        auto p_sat_for_b(int k, int n, double e, double gamma, int b,
                const EstimateOptions & opts) -> double
        {
            auto n_elig = expected_eligible_patterns(k, e, gamma, b, opts).to_double();
            auto p = p_auth_pattern(k, n, b, opts.auth_prob);
            if (n_elig < 1)
                return clamp01(n_elig * p);
            return clamp01(-std::expm1(n_elig * std::log1p(-p)));
        }
    }

    auto expected_valid_plans(int k, int n, double e, double gamma,
            const EstimateOptions & opts) -> LogNumber
    {
        auto total = LogNumber::zero();
        for (int b = block_range_low(gamma); b <= k; ++b) {
            auto n_elig = expected_eligible_patterns(k, e, gamma, b, opts);
            if (n_elig.sign == 0)
                continue;
            auto lp = log_falling(n, b);
            if (lp == neg_inf)
                continue;
            total = total + LogNumber::from_log(n_elig.log_mag + lp + k * std::log(opts.auth_prob));
        }
        return total;
    }

    auto p_sat(int k, int n, double e, double gamma, const EstimateOptions & opts) -> double
    {
        double log_none = 0;
        for (int b = block_range_low(gamma); b <= k; ++b) {
            auto psb = p_sat_for_b(k, n, e, gamma, b, opts);
            if (psb >= 1)
                return 1;
            log_none += std::log1p(-psb);
        }
        return clamp01(-std::expm1(log_none));
    }

    auto predict_e50(int k, int n, double gamma, const EstimateOptions & opts) -> double
    {
        double lo = 0;
        double hi = static_cast<double>(k) * (k - 1) / 2;
        auto p_lo = p_sat(k, n, lo, gamma, opts);
        auto p_hi = p_sat(k, n, hi, gamma, opts);
        if (! (p_lo > 0.5) || ! (p_hi < 0.5))
            throw ConfigError{"no satisfiability transition within the not-equals range"};

        for (int iter = 0; iter < 200; ++iter) {
            auto mid = 0.5 * (lo + hi);
            auto pm = p_sat(k, n, mid, gamma, opts);
            if (std::abs(pm - 0.5) < 1e-6)
                return mid;
            (pm > 0.5 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    auto stored_e50(int k) -> std::optional<double>
    {
        switch (k) {
            default: return std::nullopt;
        }
    }

    auto predict_beta(int k, double e50_empirical) -> double
    {
        if (! (e50_empirical > 0))
            throw ConfigError{"predict_beta requires a positive empirical e50"};

        auto n = 10 * k;
        auto g = [&] (double beta) {
            return p_sat(k, n, beta * e50_empirical, beta * k, EstimateOptions{});
        };

        double lo = 1e-6, hi = 3;
        if (! (g(lo) > 0.5) || ! (g(hi) < 0.5))
            throw ConfigError{"no satisfiability transition for beta in (0, 3]"};

        while (hi - lo > 1e-4) {
            auto mid = 0.5 * (lo + hi);
            (g(mid) > 0.5 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    auto predict_beta(int k) -> double
    {
        auto e50 = stored_e50(k);
        if (! e50)
            throw ConfigError{"no stored empirical e50 for this k; measure one first"};
        return predict_beta(k, *e50);
    }

    auto annealed_report(int k, int n, double e, double gamma, const EstimateOptions & opts) -> AnnealedReport
    {
        AnnealedReport report;
        report.k = k;
        report.n = n;
        report.e = e;
        report.gamma = gamma;
        report.total_eligible = LogNumber::zero();
        report.total_valid = LogNumber::zero();

        double log_none = 0;
        for (int b = block_range_low(gamma); b <= k; ++b) {
            AnnealedRow row;
            row.b = b;
            row.p_not_equals = 1.0 - 1.0 / b;
            auto [p_le, p_ge] = counting_pass_probs(b);
            row.p_at_most = p_le;
            row.p_at_least = p_ge;
            row.n_eligible = expected_eligible_patterns(k, e, gamma, b, opts);

            auto lp = log_falling(n, b);
            row.auth_plans_per_pattern = lp == neg_inf
                ? LogNumber::zero()
                : LogNumber::from_log(lp + k * std::log(opts.auth_prob));
            row.n_valid = row.n_eligible * row.auth_plans_per_pattern;
            row.p_auth_pattern = p_auth_pattern(k, n, b, opts.auth_prob);
            row.p_sat_b = p_sat_for_b(k, n, e, gamma, b, opts);

            report.total_eligible = report.total_eligible + row.n_eligible;
            report.total_valid = report.total_valid + row.n_valid;
            log_none += std::log1p(-std::min(row.p_sat_b, 1.0));
            report.rows.push_back(row);
        }
        report.p_sat_total = clamp01(-std::expm1(log_none));
        return report;
    }

    auto to_csv(const AnnealedReport & report) -> std::string
    {
        std::string out = "b,p_not_equals,p_at_most,p_at_least,n_eligible,"
                          "auth_plans_per_pattern,n_valid,p_auth_pattern,p_sat\n";
        char buf[128];
        for (const auto & row : report.rows) {
            std::snprintf(buf, sizeof buf, "%d,%.4e,%.4e,%.4e,", row.b,
                    row.p_not_equals, row.p_at_most, row.p_at_least);
            out += buf;
            out += row.n_eligible.to_string() + "," + row.auth_plans_per_pattern.to_string()
                    + "," + row.n_valid.to_string() + ",";
            std::snprintf(buf, sizeof buf, "%.4e,%.4e\n", row.p_auth_pattern, row.p_sat_b);
            out += buf;
        }
        out += "total,,,," + report.total_eligible.to_string() + ",,"
                + report.total_valid.to_string() + ",,";
        char tail[32];
        std::snprintf(tail, sizeof tail, "%.4e\n", report.p_sat_total);
        out += tail;
        return out;
    }
}
