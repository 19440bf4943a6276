#include <wsp/analysis.hh>
#include <wsp/core.hh>
#include <wsp/experiments.hh>
#include <wsp/generator.hh>
#include <wsp/instance_io.hh>
#include <wsp/pb.hh>
#include <wsp/solver.hh>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace wsp;

namespace
{
    namespace exit_code
    {
        constexpr int ok = 0;
        constexpr int sat = 10;
        constexpr int unsat = 20;
        constexpr int usage = 2;
        constexpr int verification = 3;
        constexpr int timed_out = 4;
    }

    auto read_file(const std::string & path) -> std::string
    {
        if (path == "-") {
            std::ostringstream buf;
            buf << std::cin.rdbuf();
            return buf.str();
        }
        std::ifstream in{path, std::ios::binary};
        if (! in)
            throw ConfigError{"cannot read '" + path + "'"};
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }

    auto write_output(const std::string & path, const std::string & content) -> void
    {
        if (path.empty() || path == "-") {
            std::cout << content;
            return;
        }
        std::ofstream out{path, std::ios::binary};
        if (! out)
            throw ConfigError{"cannot write '" + path + "'"};
        out << content;
    }

    auto default_workers() -> int
    {
        if (const char * env = std::getenv("WSP_WORKERS"))
            return std::max(1, std::atoi(env));
        return 1;
    }

    auto stats_csv(const SolveResult & res) -> std::string
    {
        std::string out = "verdict,nodes,max_depth,prune_not_equals,prune_at_most,"
                          "prune_at_least,prune_authorisation,nodes_at_depth,wall_ms\n";
        out += res.verdict == SolveVerdict::Sat ? "sat"
                : res.verdict == SolveVerdict::Unsat ? "unsat" : "timeout";
        out += "," + std::to_string(res.stats.nodes) + "," + std::to_string(res.stats.max_depth)
                + "," + std::to_string(res.stats.prune_not_equals)
                + "," + std::to_string(res.stats.prune_at_most)
                + "," + std::to_string(res.stats.prune_at_least)
                + "," + std::to_string(res.stats.prune_authorisation) + ",";
        for (std::size_t d = 0; d < res.stats.nodes_at_depth.size(); ++d)
            out += (d ? ";" : "") + std::to_string(res.stats.nodes_at_depth[d]);
        char buf[32];
        std::snprintf(buf, sizeof buf, ",%.3f\n", res.wall_ms);
        return out + buf;
    }

    struct GenerateArgs
    {
        int k = 0, n = 0, e = 0, gamma = 0;
        std::uint64_t seed = 0;
        std::string out;
    };

    auto do_generate(const GenerateArgs & args) -> int
    {
        auto inst = generate(GenConfig{args.k, args.n, args.e, args.gamma, args.seed});
        write_output(args.out, write_instance(inst));
        return exit_code::ok;
    }

    struct SolveArgs
    {
        std::string in, heuristic = "on", stats, out;
        std::int64_t timeout_ms = 0;
    };

    auto do_solve(const SolveArgs & args) -> int
    {
        auto inst = parse_instance(read_file(args.in));
        auto merged = eliminate_equals(inst);

        SolveOptions sopts;
        sopts.heuristic = args.heuristic != "off";
        sopts.timeout_ms = args.timeout_ms;

        if (merged.trivially_unsat) {
            if (! args.stats.empty()) {
                SolveResult res;
                res.verdict = SolveVerdict::Unsat;
                write_output(args.stats, stats_csv(res));
            }
            write_output(args.out, write_solution_unsat());
            return exit_code::unsat;
        }

        auto res = solve(merged.instance, sopts);
        if (! args.stats.empty())
            write_output(args.stats, stats_csv(res));

        switch (res.verdict) {
            case SolveVerdict::TimedOut:
                std::cerr << "timed out after " << args.timeout_ms << " ms\n";
                return exit_code::timed_out;

            case SolveVerdict::Unsat:
                write_output(args.out, write_solution_unsat());
                return exit_code::unsat;

            case SolveVerdict::Sat: {
                auto plan = expand_plan(res.plan, merged.step_map);
                auto verdict = verify_plan(inst, plan);
                if (! verdict.valid()) {
                    std::cerr << "internal error: solver returned an invalid plan:\n";
                    for (const auto & v : verdict.violations)
                        std::cerr << "  " << v.describe(inst) << "\n";
                    return exit_code::verification;
                }
                write_output(args.out, write_solution(plan));
                return exit_code::sat;
            }
        }
        return exit_code::usage;
    }

    struct EncodeArgs
    {
        std::string in, formulation = "pbpb", counting = "edges", out;
    };

    auto do_encode(const EncodeArgs & args) -> int
    {
        auto inst = parse_instance(read_file(args.in));
        PBModel model;
        if (args.formulation == "udpb")
            model = encode_udpb(inst);
        else if (args.formulation == "pbpb") {
            EncodeOptions opts;
            if (args.counting == "tvars")
                opts.counting = CountingMode::TVars;
            else if (args.counting != "edges")
                throw ConfigError{"--counting must be 'edges' or 'tvars'"};
            model = encode_pbpb(inst, opts);
        }
        else
            throw ConfigError{"--formulation must be 'udpb' or 'pbpb'"};
        write_output(args.out, emit_opb(model));
        return exit_code::ok;
    }

    struct DecodeArgs
    {
        std::string model_map, pbsolution, out;
    };

    auto do_decode(const DecodeArgs & args) -> int
    {
        auto model = parse_opb(read_file(args.model_map));
        auto sol = parse_pb_solution(read_file(args.pbsolution));
        if (sol.unsat) {
            write_output(args.out, write_solution_unsat());
            return exit_code::unsat;
        }

        std::vector<char> values(model.vars.size(), -1);
        for (auto [id, value] : sol.values) {
            if (id < 1 || id > static_cast<int>(model.vars.size()))
                throw ParseError{"solution names x" + std::to_string(id)
                        + " outside the catalogue"};
            values[static_cast<std::size_t>(id - 1)] = value ? 1 : 0;
        }
        for (auto v : values)
            if (v < 0)
                throw ParseError{"solution does not assign every catalogue variable"};

        auto decoded = decode_solution(model, values);

        if (model.instance_text.empty())
            throw ConfigError{"the model file carries no embedded instance to verify against"};
        auto inst = parse_instance(model.instance_text);
        auto verdict = verify_plan(inst, decoded.plan);
        if (! verdict.valid()) {
            std::cerr << "decoded plan violates the instance:\n";
            for (const auto & v : verdict.violations)
                std::cerr << "  " << v.describe(inst) << "\n";
            return exit_code::verification;
        }
        write_output(args.out, write_solution(decoded.plan));
        return exit_code::sat;
    }

    struct VerifyArgs
    {
        std::string in, solution;
    };

    auto do_verify(const VerifyArgs & args) -> int
    {
        auto inst = parse_instance(read_file(args.in));
        auto sol = parse_solution(read_file(args.solution), inst.step_count);
        if (! sol.sat) {
            std::cerr << "nothing to verify: the solution file says UNSAT\n";
            return exit_code::usage;
        }
        auto verdict = verify_plan(inst, sol.plan);
        if (! verdict.valid()) {
            for (const auto & v : verdict.violations)
                std::cerr << v.describe(inst) << "\n";
            return exit_code::verification;
        }
        return exit_code::ok;
    }

    struct EstimateArgs
    {
        int k = 0, n = 0;
        double e = 0, gamma = 0;
        bool table = false, exact_auth = false, two_factor = false;
        bool skip_at_most = false, skip_at_least = false;
        std::string out;
    };

    auto do_estimate(const EstimateArgs & args) -> int
    {
        EstimateOptions opts;
        opts.at_most_factor = ! args.skip_at_most;
        opts.at_least_factor = ! args.skip_at_least;
        opts.two_factor = args.two_factor;
        if (args.exact_auth)
            opts.auth_prob = expected_auth_fraction(args.k).value();

        if (args.table) {
            write_output(args.out, to_csv(annealed_report(args.k, args.n, args.e, args.gamma, opts)));
            return exit_code::ok;
        }
        auto p = p_sat(args.k, args.n, args.e, args.gamma, opts);
        auto plans = expected_valid_plans(args.k, args.n, args.e, args.gamma, opts);
        char buf[64];
        std::snprintf(buf, sizeof buf, "p_sat %.6g\n", p);
        write_output(args.out, std::string{buf} + "expected_valid_plans " + plans.to_string() + "\n");
        return exit_code::ok;
    }

    struct E50Args
    {
        int k = 0, n = 0, gamma = 0, samples = 100;
        std::uint64_t seed = 0;
        int workers = default_workers();
        std::int64_t timeout_ms = 0;
        std::string out;
    };

    auto do_e50(const E50Args & args) -> int
    {
        ExperimentOptions opts;
        opts.workers = args.workers;
        opts.solve.timeout_ms = args.timeout_ms;
        opts.e50_samples = args.samples;
        auto result = find_e50(args.k, args.n, args.gamma, args.samples, args.seed, opts);
        std::cout << "e50 " << result.e50 << "\n";
        if (! args.out.empty())
            write_output(args.out, to_csv(result));
        return exit_code::ok;
    }

    struct SliceArgs
    {
        std::string mode = "vary-k";
        std::vector<int> ks;
        int n_mult = 10;
        int k = 0;
        std::vector<int> ns;
        int samples = 100, e50_samples = 100;
        std::uint64_t seed = 0;
        int workers = default_workers();
        std::int64_t timeout_ms = 0;
        std::string out;
    };

    auto do_slice(const SliceArgs & args) -> int
    {
        ExperimentOptions opts;
        opts.workers = args.workers;
        opts.solve.timeout_ms = args.timeout_ms;
        opts.e50_samples = args.e50_samples;

        std::vector<SliceRow> rows;
        if (args.mode == "vary-k") {
            if (args.ks.empty())
                throw ConfigError{"vary-k needs --ks"};
            rows = run_vary_k_slice(args.ks,
                    [&] (int k) { return k * args.n_mult; }, args.samples, args.seed, opts);
        }
        else if (args.mode == "fixed-k") {
            if (args.k <= 0 || args.ns.empty())
                throw ConfigError{"fixed-k needs --k and --ns"};
            rows = run_fixed_k_slice(args.k, args.ns, args.samples, args.seed, opts);
        }
        else
            throw ConfigError{"--mode must be 'vary-k' or 'fixed-k'"};

        write_output(args.out, to_csv(rows));
        return exit_code::ok;
    }

    struct BetaArgs
    {
        int k = 0;
        std::vector<double> betas;
        int samples = 100, e50_samples = 100;
        int e50_override = -1;
        std::uint64_t seed = 0;
        int workers = default_workers();
        std::int64_t timeout_ms = 0;
        std::string out;
    };

    auto do_beta(const BetaArgs & args) -> int
    {
        ExperimentOptions opts;
        opts.workers = args.workers;
        opts.solve.timeout_ms = args.timeout_ms;
        opts.e50_samples = args.e50_samples;
        if (args.e50_override >= 0)
            opts.e50_lookup = [&] (int, int) { return args.e50_override; };

        auto rows = run_beta_sweep(args.k, args.betas, args.samples, args.seed, opts);
        write_output(args.out, to_csv(rows));
        return exit_code::ok;
    }

    struct ForcedArgs
    {
        std::string in;
        int k = 0, n = 0, e = 0, gamma = 0;
        std::uint64_t seed = 0;
        double beta = 0;
        std::string id;
        std::int64_t timeout_ms = 0;
        std::string out;
    };

    auto do_forced(const ForcedArgs & args) -> int
    {
        Instance inst;
        std::string id = args.id;
        if (! args.in.empty()) {
            inst = parse_instance(read_file(args.in));
            if (id.empty())
                id = args.in;
        }
        else {
            if (args.k <= 0)
                throw ConfigError{"forced needs --in or generator parameters"};
            inst = generate(GenConfig{args.k, args.n, args.e, args.gamma, args.seed});
            if (id.empty())
                id = "seed" + std::to_string(args.seed);
        }

        SolveOptions sopts;
        sopts.timeout_ms = args.timeout_ms;
        auto report = forced_m_probe(inst, sopts);
        report.instance_id = id;
        report.beta = args.beta;
        write_output(args.out, forced_csv_header() + "\n" + to_csv_row(report) + "\n");
        return exit_code::ok;
    }
}

auto main(int argc, char ** argv) -> int
{
    CLI::App app{"workflow satisfiability toolkit"};
    app.require_subcommand(1);
    int rc = exit_code::ok;

    GenerateArgs gen;
    auto * cmd_gen = app.add_subcommand("generate", "draw a random instance");
    cmd_gen->add_option("--k", gen.k, "step count")->required();
    cmd_gen->add_option("--n", gen.n, "user count")->required();
    cmd_gen->add_option("--e", gen.e, "not-equals constraint count")->required();
    cmd_gen->add_option("--gamma", gen.gamma, "count of each 5-scope constraint family")->required();
    cmd_gen->add_option("--seed", gen.seed, "generator seed")->required();
    cmd_gen->add_option("--out", gen.out, "output file (default stdout)");
    cmd_gen->callback([&] { rc = do_generate(gen); });

    SolveArgs sol;
    auto * cmd_solve = app.add_subcommand("solve", "run the pattern search");
    cmd_solve->add_option("--in", sol.in, "instance file")->required();
    cmd_solve->add_option("--heuristic", sol.heuristic, "on|off (default on)")
            ->check(CLI::IsMember({"on", "off"}));
    cmd_solve->add_option("--stats", sol.stats, "write search statistics CSV here");
    cmd_solve->add_option("--timeout-ms", sol.timeout_ms, "per-solve time limit");
    cmd_solve->add_option("--out", sol.out, "solution file (default stdout)");
    cmd_solve->callback([&] { rc = do_solve(sol); });

    EncodeArgs enc;
    auto * cmd_encode = app.add_subcommand("encode", "emit a pseudo-Boolean model");
    cmd_encode->add_option("--in", enc.in, "instance file")->required();
    cmd_encode->add_option("--formulation", enc.formulation, "udpb|pbpb (default pbpb)");
    cmd_encode->add_option("--counting", enc.counting, "edges|tvars (default edges)");
    cmd_encode->add_option("--out", enc.out, "OPB file (default stdout)");
    cmd_encode->callback([&] { rc = do_encode(enc); });

    DecodeArgs dec;
    auto * cmd_decode = app.add_subcommand("decode", "decode a PB solver's output");
    cmd_decode->add_option("--model-map", dec.model_map, "OPB file with map comments")->required();
    cmd_decode->add_option("--pbsolution", dec.pbsolution, "PB solver output file")->required();
    cmd_decode->add_option("--out", dec.out, "solution file (default stdout)");
    cmd_decode->callback([&] { rc = do_decode(dec); });

    VerifyArgs ver;
    auto * cmd_verify = app.add_subcommand("verify", "check a solution against an instance");
    cmd_verify->add_option("--in", ver.in, "instance file")->required();
    cmd_verify->add_option("--solution", ver.solution, "solution file")->required();
    cmd_verify->callback([&] { rc = do_verify(ver); });

    EstimateArgs est;
    auto * cmd_estimate = app.add_subcommand("estimate", "annealed satisfiability estimate");
    cmd_estimate->add_option("--k", est.k, "step count")->required();
    cmd_estimate->add_option("--n", est.n, "user count")->required();
    cmd_estimate->add_option("--e", est.e, "not-equals constraint count")->required();
    cmd_estimate->add_option("--gamma", est.gamma, "count of each 5-scope family")->required();
    cmd_estimate->add_flag("--table", est.table, "print the per-block-count table as CSV");
    cmd_estimate->add_flag("--exact-auth", est.exact_auth,
            "use the generator's exact authorisation fraction");
    cmd_estimate->add_flag("--two-factor", est.two_factor,
            "raise the counting factors to gamma separately");
    cmd_estimate->add_flag("--skip-at-most", est.skip_at_most, "drop the at-most factor");
    cmd_estimate->add_flag("--skip-at-least", est.skip_at_least, "drop the at-least factor");
    cmd_estimate->add_option("--out", est.out, "output file (default stdout)");
    cmd_estimate->callback([&] { rc = do_estimate(est); });

    E50Args e50;
    auto * cmd_e50 = app.add_subcommand("e50", "measure the phase-transition point");
    cmd_e50->add_option("--k", e50.k, "step count")->required();
    cmd_e50->add_option("--n", e50.n, "user count")->required();
    cmd_e50->add_option("--gamma", e50.gamma, "count of each 5-scope family")->required();
    cmd_e50->add_option("--samples", e50.samples, "instances per probed e (default 100)");
    cmd_e50->add_option("--seed", e50.seed, "master seed")->required();
    cmd_e50->add_option("--workers", e50.workers, "parallel solvers (default $WSP_WORKERS or 1)");
    cmd_e50->add_option("--timeout-ms", e50.timeout_ms, "per-solve time limit");
    cmd_e50->add_option("--out", e50.out, "write the probed curve CSV here");
    cmd_e50->callback([&] { rc = do_e50(e50); });

    SliceArgs slice;
    auto * cmd_slice = app.add_subcommand("slice", "runtime percentiles along a parameter slice");
    cmd_slice->add_option("--mode", slice.mode, "vary-k|fixed-k (default vary-k)");
    cmd_slice->add_option("--ks", slice.ks, "step counts for vary-k")->delimiter(',');
    cmd_slice->add_option("--n-mult", slice.n_mult, "n = k * this (default 10)");
    cmd_slice->add_option("--k", slice.k, "step count for fixed-k");
    cmd_slice->add_option("--ns", slice.ns, "user counts for fixed-k")->delimiter(',');
    cmd_slice->add_option("--samples", slice.samples, "instances per row (default 100)");
    cmd_slice->add_option("--e50-samples", slice.e50_samples, "samples per e50 probe (default 100)");
    cmd_slice->add_option("--seed", slice.seed, "master seed")->required();
    cmd_slice->add_option("--workers", slice.workers, "parallel solvers");
    cmd_slice->add_option("--timeout-ms", slice.timeout_ms, "per-solve limit; timeouts are censored");
    cmd_slice->add_option("--out", slice.out, "CSV file (default stdout)");
    cmd_slice->callback([&] { rc = do_slice(slice); });

    BetaArgs beta;
    auto * cmd_beta = app.add_subcommand("beta", "sweep the constraint density multiplier");
    cmd_beta->add_option("--k", beta.k, "step count")->required();
    cmd_beta->add_option("--betas", beta.betas, "multipliers, e.g. 0.5,1.0,1.5")
            ->required()->delimiter(',');
    cmd_beta->add_option("--samples", beta.samples, "instances per beta (default 100)");
    cmd_beta->add_option("--e50", beta.e50_override, "use this e50 instead of measuring");
    cmd_beta->add_option("--e50-samples", beta.e50_samples, "samples per e50 probe");
    cmd_beta->add_option("--seed", beta.seed, "master seed")->required();
    cmd_beta->add_option("--workers", beta.workers, "parallel solvers");
    cmd_beta->add_option("--timeout-ms", beta.timeout_ms, "per-solve limit");
    cmd_beta->add_option("--out", beta.out, "CSV file (default stdout)");
    cmd_beta->callback([&] { rc = do_beta(beta); });

    ForcedArgs forced;
    auto * cmd_forced = app.add_subcommand("forced", "count forced same/different step pairs");
    cmd_forced->add_option("--in", forced.in, "instance file (alternative to generating)");
    cmd_forced->add_option("--k", forced.k, "step count");
    cmd_forced->add_option("--n", forced.n, "user count");
    cmd_forced->add_option("--e", forced.e, "not-equals constraint count");
    cmd_forced->add_option("--gamma", forced.gamma, "count of each 5-scope family");
    cmd_forced->add_option("--seed", forced.seed, "generator seed");
    cmd_forced->add_option("--beta", forced.beta, "context label written to the CSV");
    cmd_forced->add_option("--id", forced.id, "instance label (default file or seed)");
    cmd_forced->add_option("--timeout-ms", forced.timeout_ms, "per-probe solve limit");
    cmd_forced->add_option("--out", forced.out, "CSV file (default stdout)");
    cmd_forced->callback([&] { rc = do_forced(forced); });

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError & e) {
        auto code = app.exit(e);
        return code == 0 ? exit_code::ok : exit_code::usage;
    }
    catch (const DecodeError & e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::verification;
    }
    catch (const ParseError & e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::usage;
    }
    catch (const ConfigError & e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::usage;
    }
    catch (const StructuralError & e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::usage;
    }
    return rc;
}
