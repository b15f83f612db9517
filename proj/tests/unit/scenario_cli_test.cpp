#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lsmr/cli.hpp"
#include "lsmr/scenario.hpp"
#include "lsmr/sweep.hpp"
#include "lsmr/verification.hpp"

using namespace lsmr;

namespace {

const char* kBase = R"({"system": {"n": 3}, "protocol": "epaxos",
  "delays": {"preset": "constant", "value": 1},
  "workload": {"commands": 20, "conflict_rate": 0.5, "window": 30}, "seed": 4})";

std::string with(const std::string& extra) {
    std::string s = kBase;
    s.pop_back();
    return s + ", " + extra + "}";
}

std::string jsonl(const Trace& t) {
    std::ostringstream out;
    write_jsonl(t, out);
    return out.str();
}

struct Cli {
    int code = 0;
    std::string out, err;
};

Cli invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "lsmr");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Cli r;
    r.code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("lsmr_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST(Config, DefaultsFillIn) {
    ScenarioConfig c = parse_scenario_config(kBase);
    EXPECT_EQ(c.system.n, 3u);
    EXPECT_EQ(c.system.protocol, Protocol::EPaxos);
    EXPECT_EQ(c.system.consensus, ConsensusMode::Oracle);
    EXPECT_EQ(c.scheduler.kind, "nice");
    EXPECT_EQ(c.quorum_policy, QuorumPolicy::Lowest);
    EXPECT_EQ(to_scenario(c).items.size(), 20u);
}

TEST(Config, RejectsBadInput) {
    const std::vector<std::string> bad = {
        "{",                                                      // not JSON
        R"({"system": {"n": 3}})",                                // no protocol
        with(R"("bogus": 1)"),                                    // unknown key
        R"({"system": {"n": 3, "x": 1}, "protocol": "epaxos"})",  // unknown nested key
        R"({"system": {"n": 3}, "protocol": "paxos"})",
        R"({"system": {"n": 0}, "protocol": "epaxos"})",
        R"({"system": {"n": 3, "f": 2}, "protocol": "epaxos"})",
        R"({"system": {"n": 3}, "protocol": "epaxos", "workload": {"conflict_rate": 1.5}})",
        R"({"system": {"n": 3}, "protocol": "epaxos", "workload": {"window": 0}})",
        R"({"system": {"n": 3}, "protocol": "epaxos", "delays": {"preset": "mars"}})",
        R"({"system": {"n": 2}, "protocol": "epaxos", "delays": {"preset": "matrix", "matrix": [[0]]}})",
        R"({"system": {"n": 3}, "protocol": "epaxos", "failures": {"crashes": [{"process": 7, "time": 1}]}})",
        R"({"system": {"n": 3}, "protocol": "epaxos", "scheduler": {"kind": "chain", "k": 0}})",
        R"({"system": {"n": 3}, "protocol": "epaxos", "scheduler": "fair"})",
        R"({"system": {"n": 3}, "protocol": "epaxos", "failures": {"recovery_rule": "vote"}})",
        R"({"system": {"n": 3}, "protocol": "epaxos", "scheduler": "nice",
            "failures": {"crashes": [{"process": 1, "time": 1}]}})",
    };
    for (const auto& text : bad) EXPECT_THROW(parse_scenario_config(text), ConfigInvalid) << text;
}

TEST(Config, SweepCrossProduct) {
    ScenarioConfig c = parse_scenario_config(
        with(R"("sweep": {"conflict_rates": [0, 0.3], "protocols": ["epaxos", "mencius"], "seeds": [1, 2]})"));
    auto points = sweep_points(c);
    ASSERT_EQ(points.size(), 8u);
    for (const auto& p : points) {
        EXPECT_EQ(p.config.system.protocol, p.protocol);
        EXPECT_EQ(p.config.workload.conflict_rate, p.conflict_rate);
        EXPECT_EQ(p.config.seed, p.seed);
    }
}

TEST(Config, ShippedFilesParse) {
    for (const auto& entry : std::filesystem::directory_iterator(LSMR_CONFIGS))
        EXPECT_NO_THROW(load_scenario_config(entry.path().string())) << entry.path();
}

TEST(Determinism, SameSeedSameBytes) {
    ScenarioConfig c = parse_scenario_config(with(R"("scheduler": "random")"));
    std::string first = jsonl(run(to_scenario(c)).trace);
    EXPECT_EQ(first, jsonl(run(to_scenario(c)).trace));
    c.seed = 5;
    EXPECT_NE(first, jsonl(run(to_scenario(c)).trace));
}

TEST(Determinism, RandomScenarioSuiteSeed) {
    Scenario s = random_scenario(123);
    EXPECT_EQ(jsonl(run(s).trace), jsonl(run(random_scenario(123)).trace));
}

TEST(TraceIo, RoundTrip) {
    Trace t = run(to_scenario(parse_scenario_config(kBase))).trace;
    std::istringstream in(jsonl(t));
    Trace back = read_jsonl(in);
    EXPECT_EQ(back.steps.size(), t.steps.size());
    EXPECT_EQ(jsonl(back), jsonl(t));
}

TEST(TraceIo, MalformedLineIsRejected) {
    std::istringstream in("{\"not\": \"a header\"}\n");
    EXPECT_THROW(read_jsonl(in), TraceInvalid);
}

TEST(Exhaustive, TwoConflictingCommandsAreSafe) {
    ExhaustiveSpec spec;
    spec.config = default_config(Protocol::EPaxos, 3);
    spec.submissions = {{1}, {1}, {}};
    std::size_t runs = 0;
    auto stats = explore(spec, [&](const Trace& t) {
        ++runs;
        for (const Verdict& v : check_properties(t, safety_properties(), false))
            EXPECT_TRUE(v.pass) << v.property;
        return true;
    });
    EXPECT_EQ(stats.maximal_runs, runs);
    EXPECT_GT(runs, 1u);
}

TEST(Exhaustive, StateBoundIsEnforced) {
    ExhaustiveSpec spec;
    spec.config = default_config(Protocol::EPaxos, 3);
    spec.submissions = {{1}, {1}, {1}};
    spec.max_states = 50;
    EXPECT_THROW(explore(spec, [](const Trace&) { return true; }), BoundsExceeded);
}

TEST(Sweep, ParallelMatchesSerial) {
    ScenarioConfig c = parse_scenario_config(
        with(R"("sweep": {"conflict_rates": [0, 0.5], "protocols": ["epaxos", "rotating"], "seeds": [1]})"));
    auto points = sweep_points(c);
    auto par = run_sweep(points, 4, true);
    auto ser = run_sweep_serial(points, true);
    ASSERT_EQ(par.size(), ser.size());
    for (std::size_t i = 0; i < par.size(); ++i) {
        EXPECT_EQ(par[i].trace_jsonl, ser[i].trace_jsonl);
        EXPECT_EQ(format_summary(par[i].summary), format_summary(ser[i].summary));
    }
}

TEST(CliExit, UsageAndBadInput) {
    EXPECT_NE(invoke({}).code, 0);
    EXPECT_EQ(invoke({"check", "/nonexistent.jsonl"}).code, 2);
    EXPECT_EQ(invoke({"check", std::string(LSMR_FIXTURES) + "/pending_cycle.jsonl", "--properties", "bogus"}).code, 2);
    EXPECT_EQ(invoke({"chain", "--n", "4", "--k", "3"}).code, 2);
    EXPECT_EQ(invoke({"simulate", "--config", "/nonexistent.json"}).code, 2);
}

TEST(CliExit, CheckPassesAndFails) {
    auto ok = invoke({"check", std::string(LSMR_FIXTURES) + "/pending_cycle.jsonl"});
    EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
    auto bad = invoke({"check", std::string(LSMR_FIXTURES) + "/violations/validity.jsonl", "--properties",
                    "validity"});
    EXPECT_EQ(bad.code, 1);
}

TEST(CliExit, ChainAndSkyline) {
    auto chain = invoke({"chain", "--n", "5", "--k", "4"});
    EXPECT_EQ(chain.code, 0) << chain.err;
    EXPECT_NE(chain.out.find("live chain 4"), std::string::npos) << chain.out;
    auto sky = invoke({"skyline", "--n", "7"});
    EXPECT_EQ(sky.code, 0);
    EXPECT_NE(sky.out.find("(2,3) (3,2)"), std::string::npos) << sky.out;
}

TEST(CliExit, SimulateWritesOutputs) {
    auto dir = scratch("simulate");
    auto cfg = dir / "run.json";
    std::ofstream(cfg) << kBase;
    auto r = invoke({"simulate", "--config", cfg.string(), "--out-dir", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"trace.jsonl", "cdf.csv", "commands.csv", "chains.csv"})
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    EXPECT_NE(r.out.find("commands 20"), std::string::npos) << r.out;
    auto check = invoke({"check", (dir / "trace.jsonl").string()});
    EXPECT_EQ(check.code, 0) << check.out;
}

TEST(CliExit, SeedOverrideChangesTrace) {
    auto dir = scratch("seed");
    auto cfg = dir / "run.json";
    std::ofstream(cfg) << with(R"("scheduler": "random")");
    auto read = [](const std::filesystem::path& p) {
        std::ifstream in(p);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    ASSERT_EQ(invoke({"simulate", "--config", cfg.string(), "--out-dir", (dir / "a").string()}).code, 0);
    ASSERT_EQ(invoke({"simulate", "--config", cfg.string(), "--out-dir", (dir / "b").string()}).code, 0);
    ASSERT_EQ(invoke({"simulate", "--config", cfg.string(), "--seed", "99", "--out-dir", (dir / "c").string()}).code, 0);
    EXPECT_EQ(read(dir / "a" / "trace.jsonl"), read(dir / "b" / "trace.jsonl"));
    EXPECT_NE(read(dir / "a" / "trace.jsonl"), read(dir / "c" / "trace.jsonl"));
}
