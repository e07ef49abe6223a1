#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "delib/cli/scenario.hpp"

using namespace delib;
using cli::Scenario;
using cli::ScenarioError;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("delib-cli-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream file(path, std::ios::binary);
    REQUIRE(file.good());
    return std::string((std::istreambuf_iterator<char>(file)),
                       std::istreambuf_iterator<char>());
}

const char* kConvergentScenario = R"({
  "seed": 7,
  "problems": [{"id": "q1", "statement": "pick a number", "ground_truth": "42"}],
  "agents": {"count": 3, "behavior": "convergent", "correct_count": 2,
             "incorrect_values": ["7"], "p_adopt": 1.0},
  "turns": 3
})";

}  // namespace

TEST_CASE("scenario parsing applies defaults and validates fields") {
    auto scenario = cli::parse_scenario(kConvergentScenario);
    CHECK(scenario.seed == 7);
    CHECK(scenario.problems.size() == 1);
    CHECK(scenario.problems[0].ground_truth == std::string("42"));
    CHECK(scenario.sweep_agents == std::vector<std::size_t>{3});
    CHECK(scenario.sweep_turns == std::vector<std::uint32_t>{3});
    CHECK(scenario.theta == core::Fraction(1, 2));
    CHECK(scenario.repeats == 1);
    CHECK(scenario.network.latency_max == 3.0);
}

TEST_CASE("scenario parsing rejects malformed input with a pointed message") {
    CHECK_THROWS_AS(cli::parse_scenario("{"), ScenarioError);
    try {
        cli::parse_scenario("{\n\"seed\": 1,\n!!!\n}");
        FAIL("expected a parse error");
    } catch (const ScenarioError& e) {
        // nlohmann reports the position; make sure it survives the wrap.
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }

    CHECK_THROWS_AS(cli::parse_scenario(R"({"problems": [], "agents": {"count": 2}})"),
                    ScenarioError);  // missing seed
    CHECK_THROWS_AS(cli::parse_scenario(R"({"seed": 1, "problems": [], "agents": {"count": 2}})"),
                    ScenarioError);  // empty problems
    CHECK_THROWS_AS(
        cli::parse_scenario(
            R"({"seed": 1, "problems": [{"id": "a"}], "agents": {"count": 2, "behavior": "psychic"}})"),
        ScenarioError);  // unknown behavior
    CHECK_THROWS_AS(
        cli::parse_scenario(
            R"({"seed": 1, "problems": [{"id": "a"}], "agents": {"count": 2}, "theta": 1.5})"),
        ScenarioError);  // theta out of range
    CHECK_THROWS_AS(
        cli::parse_scenario(R"({"seed": 1, "problems": [{"id": "a"}], "agents": {}})"),
        ScenarioError);  // agent count undetermined
}

TEST_CASE("theta accepts decimals, decimal strings, and ratio strings") {
    auto base = std::string(R"({"seed": 1, "problems": [{"id": "a"}],)") +
                R"( "agents": {"count": 2}, "theta": )";
    CHECK(cli::parse_scenario(base + "0.5}").theta == core::Fraction(1, 2));
    CHECK(cli::parse_scenario(base + "\"0.5\"}").theta == core::Fraction(1, 2));
    CHECK(cli::parse_scenario(base + "\"5/6\"}").theta == core::Fraction(5, 6));
    CHECK_THROWS_AS(cli::parse_scenario(base + "\"5/0\"}"), ScenarioError);
}

TEST_CASE("template rosters place correct agents first and cycle wrong values") {
    auto scenario = cli::parse_scenario(kConvergentScenario);
    core::Problem problem = scenario.problems[0];
    auto roster = scenario.roster_for(3, problem);
    REQUIRE(roster.size() == 3);
    CHECK(roster[0].value == "42");
    CHECK(roster[1].value == "42");
    CHECK(roster[2].value == "7");
    CHECK(roster[0].identity_tag == 1);
    CHECK(roster[2].identity_tag == 3);

    // correct_count without a ground truth cannot be satisfied.
    problem.ground_truth.reset();
    CHECK_THROWS_AS(scenario.roster_for(3, problem), ScenarioError);
}

TEST_CASE("environment variables override seed and output directory") {
    auto scenario = cli::parse_scenario(kConvergentScenario);
    setenv("DELIB_SEED", "123", 1);
    setenv("DELIB_OUTPUT_DIR", "/tmp/delib-env-test", 1);
    cli::apply_env_overrides(scenario);
    CHECK(scenario.seed == 123);
    CHECK(scenario.output_dir == fs::path("/tmp/delib-env-test"));

    setenv("DELIB_SEED", "not-a-number", 1);
    CHECK_THROWS_AS(cli::apply_env_overrides(scenario), ScenarioError);
    setenv("DELIB_SEED", "-4", 1);
    CHECK_THROWS_AS(cli::apply_env_overrides(scenario), ScenarioError);
    unsetenv("DELIB_SEED");
    unsetenv("DELIB_OUTPUT_DIR");
}

TEST_CASE("running a scenario writes verifiable chains, keys, and metrics") {
    auto scenario = cli::parse_scenario(kConvergentScenario);
    scenario.output_dir = fresh_dir("run");
    auto report = cli::run_scenario(scenario);

    CHECK(report.runs == 1);
    CHECK(report.successes == 1);
    CHECK(report.hung == 0);
    CHECK(report.refused == 0);
    CHECK(report.ok());
    REQUIRE(report.chain_paths.size() == 3);

    // All three node chains hold identical bytes.
    auto first = read_file(report.chain_paths[0]);
    CHECK_FALSE(first.empty());
    CHECK(read_file(report.chain_paths[1]) == first);
    CHECK(read_file(report.chain_paths[2]) == first);

    // The key sidecar lets an external verifier replay the files.
    auto directory = cli::load_directory(report.identities_path);
    CHECK(directory.size() == 3);
    for (const auto& path : report.chain_paths) {
        auto check = cli::verify_chain_file(path, directory);
        CHECK(check.ok);
        CHECK(check.height == 1);
    }

    auto table = read_file(report.metrics_path);
    CHECK(table.find("problem\tdeliberation") == 0);
    CHECK(table.find("\tsuccess\t") != std::string::npos);
    CHECK(table.find("q1#0") != std::string::npos);
    // Successful deliberations involve everyone: participation is exactly 1.
    CHECK(table.find("\t1.000000\t") != std::string::npos);
    // Accuracy climbs from 2/3 to 1 across the two evaluated turns.
    CHECK(table.find("0.666667;1.000000") != std::string::npos);
}

TEST_CASE("identical scenarios reproduce identical output bytes") {
    auto scenario = cli::parse_scenario(kConvergentScenario);
    scenario.output_dir = fresh_dir("rep1");
    auto first = cli::run_scenario(scenario);
    scenario.output_dir = fresh_dir("rep2");
    auto second = cli::run_scenario(scenario);

    CHECK(read_file(first.metrics_path) == read_file(second.metrics_path));
    CHECK(read_file(first.identities_path) == read_file(second.identities_path));
    REQUIRE(first.chain_paths.size() == second.chain_paths.size());
    for (std::size_t i = 0; i < first.chain_paths.size(); ++i) {
        CHECK(read_file(first.chain_paths[i]) == read_file(second.chain_paths[i]));
    }
}

TEST_CASE("hung runs gate identical retries and the table records the refusal") {
    const char* text = R"({
      "seed": 11,
      "problems": [{"id": "fork", "statement": "choose"}],
      "agents": [
        {"behavior": "convergent", "value": "yes"},
        {"behavior": "convergent", "value": "yes"},
        {"behavior": "stubborn", "value": "no"}
      ],
      "turns": 2,
      "repeats": 2
    })";
    auto scenario = cli::parse_scenario(text);
    scenario.output_dir = fresh_dir("hung");
    auto report = cli::run_scenario(scenario);

    CHECK(report.runs == 2);
    CHECK(report.hung == 1);
    CHECK(report.refused == 1);
    CHECK(report.ok());
    REQUIRE(report.rows.size() == 2);
    CHECK_FALSE(report.rows[0].refused);
    CHECK(report.rows[0].metrics.outcome.reason == core::HungReason::Exhausted);
    CHECK(report.rows[1].refused);

    // The refusal appended nothing: every chain holds exactly the hung block.
    auto directory = cli::load_directory(report.identities_path);
    for (const auto& path : report.chain_paths) {
        auto check = cli::verify_chain_file(path, directory);
        CHECK(check.ok);
        CHECK(check.height == 1);
    }
    auto table = read_file(report.metrics_path);
    CHECK(table.find("\thung\texhausted\t") != std::string::npos);
    CHECK(table.find("\trefused\tnone\t") != std::string::npos);
}

TEST_CASE("sweeps run every cell and name chain files after it") {
    const char* text = R"({
      "seed": 3,
      "problems": [{"id": "s", "statement": "pick", "ground_truth": "1"}],
      "agents": {"behavior": "convergent", "correct_count": 3, "p_adopt": 1.0},
      "sweep": {"agents": [3, 4], "turns": [1, 2]}
    })";
    auto scenario = cli::parse_scenario(text);
    scenario.output_dir = fresh_dir("sweep");
    auto report = cli::run_scenario(scenario);

    CHECK(report.runs == 4);           // 2 agent counts x 2 turn budgets
    CHECK(report.chain_paths.size() == 14);  // 3 + 3 + 4 + 4 nodes
    CHECK(report.ok());
    CHECK(fs::exists(scenario.output_dir / "chain-a3-t1-node0.bin"));
    CHECK(fs::exists(scenario.output_dir / "chain-a4-t2-node3.bin"));

    auto table = read_file(report.metrics_path);
    CHECK(table.find("\t3\t1\t") != std::string::npos);
    CHECK(table.find("\t4\t2\t") != std::string::npos);
}

TEST_CASE("verification catches corrupted chain files") {
    auto scenario = cli::parse_scenario(kConvergentScenario);
    scenario.output_dir = fresh_dir("corrupt");
    auto report = cli::run_scenario(scenario);
    REQUIRE(report.ok());

    auto bytes = read_file(report.chain_paths[0]);
    bytes[bytes.size() / 2] ^= 0x40;
    {
        std::ofstream file(report.chain_paths[0], std::ios::binary | std::ios::trunc);
        file << bytes;
    }
    auto directory = cli::load_directory(report.identities_path);
    auto check = cli::verify_chain_file(report.chain_paths[0], directory);
    CHECK_FALSE(check.ok);
    CHECK(check.failed_height == 1);
    CHECK_FALSE(check.detail.empty());

    // A missing key file is a configuration error.
    CHECK_THROWS_AS(cli::load_directory(scenario.output_dir / "nope.json"), ScenarioError);
}

TEST_CASE("metrics tables serialize refusals and accuracy lists stably") {
    cli::RunRow success;
    success.problem_id = "p";
    success.agent_count = 3;
    success.turns_configured = 2;
    success.metrics.deliberation_id = "p#0";
    success.metrics.turns_executed = 1;
    success.metrics.outcome = {core::OutcomeKind::Success, core::HungReason::None};
    success.metrics.confidence = core::Fraction(5, 6);
    success.metrics.participation = core::Fraction(1);
    success.metrics.per_turn_accuracy = {core::Fraction(1, 3), core::Fraction(1)};
    success.metrics.block_size = 512;
    success.metrics.initial_round_latency = 4.0;
    success.metrics.reflection_latency = 2.5;
    success.metrics.prompt_generation_time = 5.0;
    success.metrics.total_latency = 6.5;

    cli::RunRow refused;
    refused.problem_id = "p";
    refused.agent_count = 3;
    refused.turns_configured = 2;
    refused.metrics.deliberation_id = "p#1";
    refused.refused = true;

    auto table = cli::metrics_tsv({success, refused});
    auto lines_end = table.find('\n');
    CHECK(table.substr(0, lines_end) ==
          "problem\tdeliberation\tagents\tturns_configured\tturns_executed\tstatus\treason"
          "\tconfidence\tparticipation\tblock_size\tblock_mismatches\tinitial_latency"
          "\treflection_latency\tprompt_time\ttotal_latency\tper_turn_accuracy");
    CHECK(table.find("p\tp#0\t3\t2\t1\tsuccess\tnone\t0.833333\t1.000000\t512\t0\t4.000000\t"
                     "2.500000\t5.000000\t6.500000\t0.333333;1.000000\n") != std::string::npos);
    CHECK(table.find("p\tp#1\t3\t2\t0\trefused\tnone\t") != std::string::npos);
}
