#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hh"

#include <wsp/core.hh>
#include <wsp/instance_io.hh>
#include <wsp/pb.hh>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

using namespace wsp;

namespace
{
    struct RunResult
    {
        int exit_code;
        std::string out, err;
    };

    auto scratch() -> std::filesystem::path
    {
        static auto dir = [] {
            auto d = std::filesystem::temp_directory_path()
                    / ("wsp_cli_test_" + std::to_string(::getpid()));
            std::filesystem::create_directories(d);
            return d;
        }();
        return dir;
    }

    auto path_of(const std::string & name) -> std::string
    {
        return (scratch() / name).string();
    }

    auto slurp(const std::string & path) -> std::string
    {
        std::ifstream in{path, std::ios::binary};
        REQUIRE(bool(in));
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }

    auto spit(const std::string & path, const std::string & content) -> void
    {
        std::ofstream out{path, std::ios::binary};
        REQUIRE(bool(out));
        out << content;
    }

    auto run(const std::string & args) -> RunResult
    {
        auto out_file = path_of("last_stdout"), err_file = path_of("last_stderr");
        auto cmd = std::string{WSP_CLI_PATH} + " " + args
                + " > " + out_file + " 2> " + err_file;
        int status = std::system(cmd.c_str());
        REQUIRE(status != -1);
        REQUIRE(WIFEXITED(status));
        return RunResult{WEXITSTATUS(status), slurp(out_file), slurp(err_file)};
    }
}

TEST_CASE("generate, solve and verify chain together")
{
    auto inst = path_of("inst.wsp");
    auto gen_args = "generate --k 8 --n 24 --e 10 --gamma 1 --seed 42 --out ";
    CHECK(run(gen_args + inst).exit_code == 0);

    SUBCASE("generation is byte-deterministic") {
        auto again = path_of("inst_again.wsp");
        CHECK(run(gen_args + again).exit_code == 0);
        CHECK(slurp(inst) == slurp(again));
        CHECK(! slurp(inst).empty());
    }

    auto sol = path_of("inst.sol"), stats = path_of("inst.stats");
    auto solved = run("solve --in " + inst + " --out " + sol + " --stats " + stats);
    CHECK(solved.exit_code == 10);

    auto stats_text = slurp(stats);
    CHECK(stats_text.rfind("verdict,nodes,max_depth,prune_not_equals,prune_at_most,"
            "prune_at_least,prune_authorisation,nodes_at_depth,wall_ms\nsat,", 0) == 0);

    CHECK(run("verify --in " + inst + " --solution " + sol).exit_code == 0);

    SUBCASE("solving is byte-deterministic") {
        auto sol2 = path_of("inst2.sol");
        CHECK(run("solve --in " + inst + " --out " + sol2).exit_code == 10);
        CHECK(slurp(sol) == slurp(sol2));
    }
    SUBCASE("the unguided search reaches the same verdict") {
        auto sol3 = path_of("inst3.sol");
        CHECK(run("solve --heuristic off --in " + inst + " --out " + sol3).exit_code == 10);
        CHECK(run("verify --in " + inst + " --solution " + sol3).exit_code == 0);
    }
}

TEST_CASE("verification rejects broken solutions")
{
    auto inst = path_of("merged.wsp");
    spit(inst, write_instance(fixtures::worked_example_merged()));

    // u0 may only take step 1, so this plan breaks authorisation
    auto bad = path_of("bad.sol");
    spit(bad, "SAT\ns0 -> u0\ns1 -> u0\ns2 -> u0\ns3 -> u0\n");
    auto res = run("verify --in " + inst + " --solution " + bad);
    CHECK(res.exit_code == 3);
    CHECK(! res.err.empty());

    auto unsat_claim = path_of("claim.sol");
    spit(unsat_claim, "UNSAT\n");
    CHECK(run("verify --in " + inst + " --solution " + unsat_claim).exit_code == 2);
}

TEST_CASE("unsatisfiable instances exit with the unsat code")
{
    Instance pigeon = fixtures::unconstrained(2, 1);
    pigeon.constraints = {Constraint::not_equals(0, 1)};
    auto inst = path_of("pigeon.wsp");
    spit(inst, write_instance(pigeon));

    auto sol = path_of("pigeon.sol");
    CHECK(run("solve --in " + inst + " --out " + sol).exit_code == 20);
    CHECK(slurp(sol) == "UNSAT\n");

    SUBCASE("contradictions found before the search still write stats") {
        Instance clash = fixtures::unconstrained(2, 1);
        clash.constraints = {Constraint::equals(0, 1), Constraint::not_equals(0, 1)};
        auto inst2 = path_of("clash.wsp"), stats = path_of("clash.stats");
        spit(inst2, write_instance(clash));
        CHECK(run("solve --in " + inst2 + " --out " + path_of("clash.sol")
                + " --stats " + stats).exit_code == 20);
        CHECK(slurp(stats).find("\nunsat,0,0,0,0,0,0,,0.000\n") != std::string::npos);
    }
}

TEST_CASE("encode and decode round trip through a solver transcript")
{
    auto inst = path_of("enc.wsp");
    spit(inst, write_instance(fixtures::worked_example_merged()));
    auto opb = path_of("enc.opb");
    CHECK(run("encode --in " + inst + " --out " + opb).exit_code == 0);

    auto model = parse_opb(slurp(opb));
    auto assignment = first_assignment(model);
    REQUIRE(assignment.has_value());

    std::string transcript = "c toy transcript\ns SATISFIABLE\nv";
    for (std::size_t i = 0; i < assignment->size(); ++i)
        transcript += std::string{" "} + ((*assignment)[i] ? "x" : "-x") + std::to_string(i + 1);
    transcript += "\n";
    auto pbsol = path_of("enc.pbsol");
    spit(pbsol, transcript);

    auto decoded = path_of("enc.sol");
    CHECK(run("decode --model-map " + opb + " --pbsolution " + pbsol
            + " --out " + decoded).exit_code == 10);
    CHECK(run("verify --in " + inst + " --solution " + decoded).exit_code == 0);

    SUBCASE("an unsatisfiable transcript propagates the unsat code") {
        spit(pbsol, "s UNSATISFIABLE\n");
        auto out = path_of("enc_unsat.sol");
        CHECK(run("decode --model-map " + opb + " --pbsolution " + pbsol
                + " --out " + out).exit_code == 20);
        CHECK(slurp(out) == "UNSAT\n");
    }
    SUBCASE("a transcript that breaks the one-hot rows is rejected") {
        std::string zeros = "s SATISFIABLE\nv";
        for (std::size_t i = 0; i < assignment->size(); ++i)
            zeros += " -x" + std::to_string(i + 1);
        spit(pbsol, zeros + "\n");
        CHECK(run("decode --model-map " + opb + " --pbsolution " + pbsol).exit_code == 3);
    }
    SUBCASE("the alternative formulation also encodes") {
        CHECK(run("encode --formulation udpb --in " + inst
                + " --out " + path_of("enc_udpb.opb")).exit_code == 0);
    }
    SUBCASE("equals constraints must be merged away before encoding") {
        auto raw = path_of("enc_equals.wsp");
        spit(raw, write_instance(fixtures::worked_example()));
        CHECK(run("encode --in " + raw).exit_code == 2);
    }
}

TEST_CASE("long searches respect the time limit")
{
    auto inst = path_of("hard.wsp");
    CHECK(run("generate --k 32 --n 320 --e 56 --gamma 32 --seed 5 --out " + inst).exit_code == 0);
    auto res = run("solve --timeout-ms 1 --in " + inst);
    CHECK(res.exit_code == 4);
    CHECK(res.err.find("timed out") != std::string::npos);
}

TEST_CASE("usage mistakes exit with the usage code")
{
    CHECK(run("").exit_code == 2);
    CHECK(run("solve --in " + path_of("does_not_exist.wsp")).exit_code == 2);
    CHECK(run("solve --heuristic sideways --in x").exit_code == 2);
    CHECK(run("e50 --k 6 --n 6 --samples 20 --seed 1").exit_code == 2);
    CHECK(run("slice --mode fixed-k --seed 1").exit_code == 2);
    CHECK(run("slice --mode vary-k --seed 1").exit_code == 2);

    auto garbage = path_of("garbage.wsp");
    spit(garbage, "hello\n");
    CHECK(run("solve --in " + garbage).exit_code == 2);
}

TEST_CASE("the annealed estimate prints its summary and table")
{
    auto res = run("estimate --k 30 --n 300 --e 50 --gamma 30");
    CHECK(res.exit_code == 0);
    CHECK(res.out == "p_sat 1\nexpected_valid_plans 1.151e+11\n");

    auto table = path_of("annealed.csv");
    CHECK(run("estimate --k 30 --n 300 --e 50 --gamma 30 --table --out " + table).exit_code == 0);
    auto text = slurp(table);
    CHECK(text.rfind("b,p_not_equals,p_at_most,p_at_least,n_eligible,"
            "auth_plans_per_pattern,n_valid,p_auth_pattern,p_sat\n3,", 0) == 0);
    CHECK(text.find("\ntotal,") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 30);
}

TEST_CASE("the transition subcommand reports the crossing point")
{
    auto curve = path_of("curve.csv");
    auto res = run("e50 --k 12 --n 30 --gamma 2 --samples 20 --seed 777 --out " + curve);
    CHECK(res.exit_code == 0);
    REQUIRE(res.out.rfind("e50 ", 0) == 0);
    int e50 = std::stoi(res.out.substr(4));
    CHECK(e50 > 0);
    CHECK(e50 <= 66);

    auto text = slurp(curve);
    CHECK(text.rfind("e,fraction,samples\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') > 3);

    SUBCASE("a slice without a transition is refused") {
        auto flat = run("e50 --k 6 --n 6 --gamma 0 --samples 20 --seed 777");
        CHECK(flat.exit_code == 2);
        CHECK(flat.err.find("error") != std::string::npos);
    }
}

TEST_CASE("the pair probe writes one labelled csv row")
{
    auto inst = path_of("probe.wsp");
    spit(inst, write_instance(fixtures::worked_example()));
    auto csv = path_of("probe.csv");
    CHECK(run("forced --in " + inst + " --beta 1 --id w5 --out " + csv).exit_code == 0);
    CHECK(slurp(csv) == "instance,beta,forced_equal,forced_unequal,free,explicit\n"
            "w5,1,1,0,5,4\n");
}

TEST_CASE("the beta sweep honours the supplied transition point")
{
    auto csv = path_of("beta.csv");
    CHECK(run("beta --k 8 --betas 0.5,1.0 --samples 20 --e50 10 --seed 11 --out " + csv)
            .exit_code == 0);
    auto text = slurp(csv);
    std::istringstream lines{text};
    std::string header, row1, row2;
    REQUIRE(std::getline(lines, header));
    REQUIRE(std::getline(lines, row1));
    REQUIRE(std::getline(lines, row2));
    CHECK(header.rfind("beta,k,n,e,gamma,samples,", 0) == 0);
    CHECK(row1.rfind("0.5,8,80,5,4,20,", 0) == 0);
    CHECK(row2.rfind("1,8,80,10,8,20,", 0) == 0);
}
