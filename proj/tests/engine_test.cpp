#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "delib/agent/behavior.hpp"
#include "delib/core/consensus.hpp"
#include "delib/engine/engine.hpp"

using namespace delib;
using engine::AgentSpec;
using engine::DeliberationConfig;
using engine::RunResult;
using engine::RunStatus;
using engine::Session;

namespace {

core::Problem definitive_problem(const std::string& id, const std::string& truth = "") {
    core::Problem problem;
    problem.id = id;
    problem.statement = "What is the answer to " + id + "?";
    problem.kind = core::ProblemKind::Definitive;
    if (!truth.empty()) problem.ground_truth = truth;
    return problem;
}

core::Problem prioritized_problem(const std::string& id) {
    core::Problem problem;
    problem.id = id;
    problem.statement = "Which policies should " + id + " adopt?";
    problem.kind = core::ProblemKind::Prioritized;
    return problem;
}

AgentSpec spec(std::uint64_t tag, std::unique_ptr<agent::Behavior> behavior,
               agent::PromptStyle style = agent::PromptStyle::ZeroShot) {
    AgentSpec out;
    out.identity_tag = tag;
    out.behavior = std::move(behavior);
    out.style = style;
    return out;
}

std::unique_ptr<agent::Behavior> convergent(const std::string& value, double p_adopt,
                                            std::uint64_t seed) {
    return std::make_unique<agent::ConvergentBehavior>(
        core::Action{core::DefinitiveAction{value, "initial reasoning"}}, p_adopt, seed);
}

std::unique_ptr<agent::Behavior> stubborn_value(const std::string& value) {
    return std::make_unique<agent::StubbornBehavior>(
        core::Action{core::DefinitiveAction{value, "fixed position"}});
}

std::unique_ptr<agent::Behavior> stubborn_policies(std::vector<std::string> policies) {
    return std::make_unique<agent::StubbornBehavior>(
        core::Action{core::PrioritizedAction{std::move(policies)}});
}

// Every chain in the session serialized; byte equality across nodes is the
// strongest replication check we have.
std::vector<net::Bytes> chain_files(Session& session) {
    std::vector<net::Bytes> files;
    for (auto& chain : session.chains()) files.push_back(chain.file_bytes());
    return files;
}

void require_identical_chains(Session& session) {
    auto files = chain_files(session);
    for (std::size_t i = 1; i < files.size(); ++i) REQUIRE(files[i] == files[0]);
}

// Re-verifies every block of every chain from scratch against the session
// directory, as an external auditor would.
void require_all_chains_verify(Session& session) {
    for (auto& chain : session.chains()) {
        ledger::Chain fresh(&session.directory());
        for (const auto& block : chain.blocks()) {
            auto verdict = fresh.verify_and_append(block);
            REQUIRE(verdict.ok);
        }
        REQUIRE(fresh.height() == chain.height());
    }
}

}  // namespace

TEST_CASE("initial round publishes one signed utterance per agent everywhere") {
    Session session(42, 3);
    DeliberationConfig config;
    config.seed = 7;
    config.max_turns = 1;
    config.agents.push_back(spec(1, stubborn_value("blue"), agent::PromptStyle::ChainOfThought));
    config.agents.push_back(spec(2, stubborn_value("blue")));
    config.agents.push_back(spec(3, stubborn_value("blue")));

    auto result = engine::run_deliberation(session, std::move(config), definitive_problem("p0"));
    REQUIRE(result.status == RunStatus::Completed);
    CHECK(result.metrics.outcome.success());
    // Success at the only reflection turn: two turns of three utterances.
    CHECK(result.proposer_block.transcript.size() == 6);
    for (const auto& utterance : result.proposer_block.transcript) {
        const auto* key = session.directory().find(utterance.agent);
        REQUIRE(key != nullptr);
        CHECK(net::verify_utterance(utterance, *key));
    }
    CHECK(result.metrics.participation == core::Fraction(1));
    CHECK(result.record.confidence == core::Fraction(1));
    require_identical_chains(session);
    require_all_chains_verify(session);
}

TEST_CASE("convergent majority reaches unanimity and all chains agree") {
    Session session(11, 3);
    DeliberationConfig config;
    config.seed = 5;
    config.max_turns = 3;
    config.agents.push_back(spec(1, convergent("42", 1.0, 101)));
    config.agents.push_back(spec(2, convergent("42", 1.0, 102)));
    config.agents.push_back(spec(3, convergent("7", 1.0, 103)));

    auto problem = definitive_problem("maj", "42");
    auto result = engine::run_deliberation(session, std::move(config), problem);

    REQUIRE(result.status == RunStatus::Completed);
    REQUIRE(result.metrics.outcome.success());
    CHECK(result.metrics.turns_executed == 1);  // early exit
    CHECK(result.record.confidence == core::Fraction(1));
    CHECK(result.metrics.participation == core::Fraction(1));

    // Final recorded round is unanimous on the majority value.
    const auto& final_round = result.record.actions_by_round.back();
    REQUIRE(final_round.size() == 3);
    for (const auto& [agent_id, action] : final_round) {
        CHECK(std::get<core::DefinitiveAction>(action).value == "42");
    }
    // Ground-truth accuracy moves from 2/3 to 1.
    REQUIRE(result.metrics.per_turn_accuracy.size() == 2);
    CHECK(result.metrics.per_turn_accuracy[0] == core::Fraction(2, 3));
    CHECK(result.metrics.per_turn_accuracy[1] == core::Fraction(1));

    CHECK(session.chain(0).height() == 1);
    CHECK(result.metrics.block_mismatches == 0);
    require_identical_chains(session);
    require_all_chains_verify(session);
}

TEST_CASE("early exit leaves no utterances for later turns") {
    Session session(12, 4);
    DeliberationConfig config;
    config.seed = 9;
    config.max_turns = 5;
    config.deliberation_id = "early#0";
    for (std::uint64_t tag = 1; tag <= 4; ++tag) {
        config.agents.push_back(spec(tag, convergent(tag == 1 ? "9" : "3", 1.0, 200 + tag)));
    }
    auto result = engine::run_deliberation(session, std::move(config), definitive_problem("early"));

    REQUIRE(result.metrics.outcome.success());
    REQUIRE(result.metrics.turns_executed == 1);
    // Transcript covers exactly the initial round and reflection turn 1.
    CHECK(result.proposer_block.transcript.size() == 8);
    for (const auto& utterance : result.proposer_block.transcript) {
        CHECK(utterance.turn <= 1);
    }
    CHECK(result.turn_actions.size() == 2);
}

TEST_CASE("a stubborn dissenter hangs the deliberation and gates the retry") {
    Session session(13, 3);
    auto problem = definitive_problem("split");

    DeliberationConfig config;
    config.seed = 31;
    config.max_turns = 2;
    config.deliberation_id = "split#0";
    config.agents.push_back(spec(1, convergent("yes", 1.0, 301)));
    config.agents.push_back(spec(2, convergent("yes", 1.0, 302)));
    config.agents.push_back(spec(3, stubborn_value("no")));

    auto result = engine::run_deliberation(session, std::move(config), problem);
    REQUIRE(result.status == RunStatus::Completed);
    REQUIRE_FALSE(result.metrics.outcome.success());
    CHECK(result.metrics.outcome.reason == core::HungReason::Exhausted);
    // Hung blocks are empty: no transcript, no recorded rounds.
    CHECK(result.proposer_block.transcript.empty());
    CHECK(result.record.actions_by_round.empty());
    CHECK(session.chain(0).height() == 1);
    CHECK(session.hung().contains("split"));
    require_identical_chains(session);

    // The identical roster is refused outright.
    DeliberationConfig retry;
    retry.seed = 32;
    retry.max_turns = 2;
    retry.deliberation_id = "split#1";
    retry.agents.push_back(spec(1, convergent("yes", 1.0, 311)));
    retry.agents.push_back(spec(2, convergent("yes", 1.0, 312)));
    retry.agents.push_back(spec(3, stubborn_value("no")));
    auto refused = engine::run_deliberation(session, std::move(retry), problem);
    CHECK(refused.status == RunStatus::Refused);
    CHECK(session.chain(0).height() == 1);  // nothing appended

    // Swapping one deliberator admits the problem again.
    DeliberationConfig swapped;
    swapped.seed = 33;
    swapped.max_turns = 2;
    swapped.deliberation_id = "split#2";
    swapped.agents.push_back(spec(1, convergent("yes", 1.0, 321)));
    swapped.agents.push_back(spec(2, convergent("yes", 1.0, 322)));
    swapped.agents.push_back(spec(4, convergent("yes", 1.0, 323)));
    auto second = engine::run_deliberation(session, std::move(swapped), problem);
    REQUIRE(second.status == RunStatus::Completed);
    CHECK(second.metrics.outcome.success());
    CHECK(session.chain(0).height() == 2);
    require_identical_chains(session);
    require_all_chains_verify(session);
}

TEST_CASE("unavailable agents hang the turn when participation drops too low") {
    Session session(14, 3);
    DeliberationConfig config;
    config.seed = 77;
    config.max_turns = 3;
    config.agents.push_back(spec(1, stubborn_value("ok")));
    config.agents.push_back(spec(2, stubborn_value("ok")));
    config.agents.push_back(spec(3, std::make_unique<agent::UnavailableBehavior>()));
    // min_participants defaults to all three agents.
    auto result = engine::run_deliberation(session, std::move(config), definitive_problem("gap"));

    REQUIRE_FALSE(result.metrics.outcome.success());
    CHECK(result.metrics.outcome.reason == core::HungReason::Participation);
    CHECK(result.metrics.turns_executed == 0);  // hung at the initial round
    CHECK(result.metrics.participation == core::Fraction(2, 3));
    CHECK(session.chain(0).height() == 1);
    require_identical_chains(session);
}

TEST_CASE("an abstaining agent does not veto consensus once the threshold allows it") {
    Session session(15, 3);
    DeliberationConfig config;
    config.seed = 78;
    config.max_turns = 2;
    config.min_participants = 2;
    config.agents.push_back(spec(1, stubborn_value("ok")));
    config.agents.push_back(spec(2, stubborn_value("ok")));
    config.agents.push_back(spec(3, std::make_unique<agent::UnavailableBehavior>()));
    auto result = engine::run_deliberation(session, std::move(config), definitive_problem("duo"));

    REQUIRE(result.metrics.outcome.success());
    CHECK(result.record.confidence == core::Fraction(1));
    CHECK(result.metrics.participation == core::Fraction(2, 3));
    // The recorded final round keeps the absentee as an abstention and the
    // block still verifies, on every chain.
    const auto& final_round = result.record.actions_by_round.back();
    REQUIRE(final_round.size() == 3);
    std::size_t abstentions = 0;
    for (const auto& [agent_id, action] : final_round) {
        if (core::is_abstention(action)) ++abstentions;
    }
    CHECK(abstentions == 1);
    require_all_chains_verify(session);
    require_identical_chains(session);
}

TEST_CASE("agents that answer without markers abstain but still participate") {
    Session session(16, 3);
    DeliberationConfig config;
    config.seed = 79;
    config.max_turns = 2;
    for (std::uint64_t tag = 1; tag <= 3; ++tag) {
        config.agents.push_back(spec(
            tag, std::make_unique<agent::ScriptedBehavior>(std::vector<std::string>{
                     "I am unsure.", "I am unsure.", "I am unsure."})));
    }
    auto result = engine::run_deliberation(session, std::move(config), definitive_problem("shrug"));

    // Everyone responded, so the run exhausts its turns instead of hanging
    // on participation.
    REQUIRE_FALSE(result.metrics.outcome.success());
    CHECK(result.metrics.outcome.reason == core::HungReason::Exhausted);
    CHECK(result.metrics.turns_executed == 2);
    CHECK(result.metrics.participation == core::Fraction(1));
}

TEST_CASE("graded consensus records the mean agreement over accepted policies") {
    Session session(17, 3);
    DeliberationConfig config;
    config.seed = 55;
    config.max_turns = 1;
    config.theta = core::Fraction(1, 2);
    config.agents.push_back(spec(1, stubborn_policies({"expand transit", "bike lanes"})));
    config.agents.push_back(spec(2, stubborn_policies({"expand transit", "bike lanes"})));
    config.agents.push_back(spec(3, stubborn_policies({"expand transit", "road pricing"})));

    auto result = engine::run_deliberation(session, std::move(config), prioritized_problem("city"));
    REQUIRE(result.metrics.outcome.success());
    // Levels: transit 1, bike lanes 2/3, road pricing 1/3; theta 1/2 accepts
    // the first two, so confidence is (1 + 2/3) / 2 = 5/6.
    CHECK(result.record.confidence == core::Fraction(5, 6));
    CHECK(result.metrics.confidence == core::Fraction(5, 6));
    require_all_chains_verify(session);
    require_identical_chains(session);
}

TEST_CASE("full graded agreement ends a prioritized run early") {
    Session session(18, 3);
    DeliberationConfig config;
    config.seed = 56;
    config.max_turns = 4;
    config.theta = core::Fraction(1, 2);
    for (std::uint64_t tag = 1; tag <= 3; ++tag) {
        config.agents.push_back(spec(tag, stubborn_policies({"share data"})));
    }
    auto result = engine::run_deliberation(session, std::move(config), prioritized_problem("one"));
    REQUIRE(result.metrics.outcome.success());
    CHECK(result.metrics.turns_executed == 1);
    CHECK(result.record.confidence == core::Fraction(1));
}

TEST_CASE("the logical deadline converts a slow run into a timeout hang") {
    Session session(19, 3);
    DeliberationConfig config;
    config.seed = 57;
    config.max_turns = 50;
    config.timeout = 1e-6;  // the initial round alone exceeds this
    for (std::uint64_t tag = 1; tag <= 3; ++tag) {
        config.agents.push_back(spec(tag, stubborn_value("v")));
    }
    auto result = engine::run_deliberation(session, std::move(config), definitive_problem("slow"));
    REQUIRE_FALSE(result.metrics.outcome.success());
    CHECK(result.metrics.outcome.reason == core::HungReason::Timeout);
    // Liveness: the hung run still appended exactly one block everywhere.
    for (auto& chain : session.chains()) CHECK(chain.height() == 1);
    require_identical_chains(session);
}

TEST_CASE("a transcript past the block cap concludes as an oversize hang") {
    Session session(20, 3);
    DeliberationConfig config;
    config.seed = 58;
    config.max_turns = 1;
    config.timeout = 1e9;  // large prompts cost a lot of logical time
    std::string padding(40 * 1024, 'x');
    for (std::uint64_t tag = 1; tag <= 3; ++tag) {
        std::string body = padding + "\nANSWER: same";
        config.agents.push_back(spec(tag, std::make_unique<agent::ScriptedBehavior>(
                                              std::vector<std::string>{body, body})));
    }
    auto result = engine::run_deliberation(session, std::move(config), definitive_problem("big"));
    REQUIRE_FALSE(result.metrics.outcome.success());
    CHECK(result.metrics.outcome.reason == core::HungReason::Oversize);
    CHECK(result.proposer_block.transcript.empty());
    CHECK(result.metrics.block_size < 1024);
    for (auto& chain : session.chains()) CHECK(chain.height() == 1);
    require_identical_chains(session);
}

TEST_CASE("a single agent agrees with itself at the first reflection check") {
    Session session(21, 1);
    DeliberationConfig config;
    config.seed = 59;
    config.max_turns = 3;
    config.agents.push_back(spec(1, stubborn_value("solo")));
    auto result = engine::run_deliberation(session, std::move(config), definitive_problem("solo"));
    REQUIRE(result.metrics.outcome.success());
    CHECK(result.metrics.turns_executed == 1);
    CHECK(result.record.confidence == core::Fraction(1));
    CHECK(result.metrics.participation == core::Fraction(1));
    CHECK(session.chain(0).height() == 1);
}

TEST_CASE("a fully partitioned network hangs on participation with identical chains") {
    Session session(22, 3);
    DeliberationConfig config;
    config.seed = 60;
    config.max_turns = 2;
    config.transport.drop_probability = 1.0;
    for (std::uint64_t tag = 1; tag <= 3; ++tag) {
        config.agents.push_back(spec(tag, stubborn_value("lost")));
    }
    auto result = engine::run_deliberation(session, std::move(config), definitive_problem("part"));
    REQUIRE_FALSE(result.metrics.outcome.success());
    CHECK(result.metrics.outcome.reason == core::HungReason::Participation);
    CHECK(result.metrics.participation == core::Fraction(1, 3));
    // Hung blocks carry no view-dependent data, so even fully partitioned
    // nodes write byte-identical chains.
    require_identical_chains(session);
    CHECK(result.metrics.block_mismatches == 0);
}

TEST_CASE("a lossy network still yields independently verifiable chains") {
    Session session(23, 4);
    DeliberationConfig config;
    config.seed = 61;
    config.max_turns = 4;
    config.transport.drop_probability = 0.3;
    config.min_participants = 2;
    for (std::uint64_t tag = 1; tag <= 4; ++tag) {
        config.agents.push_back(spec(tag, convergent(tag == 4 ? "b" : "a", 1.0, 400 + tag)));
    }
    auto result = engine::run_deliberation(session, std::move(config), definitive_problem("loss"));
    REQUIRE(result.status == RunStatus::Completed);
    for (auto& chain : session.chains()) CHECK(chain.height() == 1);
    require_all_chains_verify(session);
}

TEST_CASE("identical seeds reproduce chains and metrics byte for byte") {
    auto run_once = [](std::vector<net::Bytes>& files, engine::MetricsSample& metrics) {
        Session session(99, 3);
        DeliberationConfig config;
        config.seed = 12345;
        config.max_turns = 3;
        config.agents.push_back(spec(1, convergent("left", 0.7, 501)));
        config.agents.push_back(spec(2, convergent("left", 0.7, 502)));
        config.agents.push_back(spec(3, convergent("right", 0.7, 503)));
        auto result =
            engine::run_deliberation(session, std::move(config), definitive_problem("rep"));
        files = chain_files(session);
        metrics = result.metrics;
    };
    std::vector<net::Bytes> first_files, second_files;
    engine::MetricsSample first, second;
    run_once(first_files, first);
    run_once(second_files, second);

    REQUIRE(first_files == second_files);
    CHECK(first.outcome == second.outcome);
    CHECK(first.turns_executed == second.turns_executed);
    CHECK(first.total_latency == second.total_latency);
    CHECK(first.prompt_generation_time == second.prompt_generation_time);
    CHECK(first.block_size == second.block_size);
    CHECK(first.participation == second.participation);
    CHECK(first.per_turn_accuracy == second.per_turn_accuracy);
}

TEST_CASE("latency components add up and prompt generation dominates") {
    Session session(24, 3);
    DeliberationConfig config;
    config.seed = 62;
    config.max_turns = 2;
    auto styles = agent::assign_prompt_styles(3, 0.5);
    config.agents.push_back(spec(1, convergent("x", 1.0, 601), styles[0]));
    config.agents.push_back(spec(2, convergent("x", 1.0, 602), styles[1]));
    config.agents.push_back(spec(3, convergent("y", 1.0, 603), styles[2]));
    auto result = engine::run_deliberation(session, std::move(config), definitive_problem("time"));

    const auto& m = result.metrics;
    CHECK(m.total_latency ==
          doctest::Approx(m.initial_round_latency + m.reflection_latency).epsilon(1e-12));
    CHECK(m.prompt_generation_time > 0.0);
    CHECK(m.prompt_generation_time <= m.total_latency);
    CHECK(m.initial_round_latency > 0.0);
}

TEST_CASE("successful runs under randomized convergent rosters keep every invariant") {
    // Consistency: any success must be recorded as a unanimous final round,
    // every chain verifies, and all nodes hold identical bytes.
    std::size_t successes = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::size_t n = 3 + static_cast<std::size_t>(seed % 3);
        Session session(1000 + seed, n);
        DeliberationConfig config;
        config.seed = seed;
        config.max_turns = 3;
        for (std::uint64_t tag = 1; tag <= n; ++tag) {
            std::string value =
                tag <= (n / 2 + 1) ? std::string("major") : "minor" + std::to_string(tag);
            config.agents.push_back(spec(tag, convergent(value, 1.0, seed * 100 + tag)));
        }
        auto result = engine::run_deliberation(session, std::move(config),
                                               definitive_problem("inv" + std::to_string(seed)));
        REQUIRE(result.status == RunStatus::Completed);
        for (auto& chain : session.chains()) REQUIRE(chain.height() == 1);
        require_identical_chains(session);
        require_all_chains_verify(session);
        if (result.metrics.outcome.success()) {
            ++successes;
            const auto& final_round = result.record.actions_by_round.back();
            std::set<std::string> values;
            for (const auto& [agent_id, action] : final_round) {
                values.insert(std::get<core::DefinitiveAction>(action).value);
            }
            CHECK(values.size() == 1);
            CHECK(result.metrics.participation == core::Fraction(1));
        }
    }
    // With a strict majority seeded and full adoption, these all converge.
    CHECK(successes == 20);
}

TEST_CASE("configuration errors are rejected before any network activity") {
    Session session(25, 2);
    core::Problem problem = definitive_problem("cfg");

    DeliberationConfig no_turns;
    no_turns.max_turns = 0;
    no_turns.agents.push_back(spec(1, stubborn_value("a")));
    no_turns.agents.push_back(spec(2, stubborn_value("a")));
    CHECK_THROWS_AS(engine::run_deliberation(session, std::move(no_turns), problem),
                    std::invalid_argument);

    DeliberationConfig bad_theta;
    bad_theta.theta = core::Fraction(3, 2);
    bad_theta.agents.push_back(spec(1, stubborn_value("a")));
    bad_theta.agents.push_back(spec(2, stubborn_value("a")));
    CHECK_THROWS_AS(engine::run_deliberation(session, std::move(bad_theta), problem),
                    std::invalid_argument);

    DeliberationConfig duplicate_tags;
    duplicate_tags.agents.push_back(spec(1, stubborn_value("a")));
    duplicate_tags.agents.push_back(spec(1, stubborn_value("a")));
    CHECK_THROWS_AS(engine::run_deliberation(session, std::move(duplicate_tags), problem),
                    std::invalid_argument);

    DeliberationConfig wrong_count;
    wrong_count.agents.push_back(spec(1, stubborn_value("a")));
    CHECK_THROWS_AS(engine::run_deliberation(session, std::move(wrong_count), problem),
                    std::invalid_argument);

    CHECK(session.chain(0).height() == 0);
}

TEST_CASE("per-agent accuracy helper counts matches and rejects missing truth") {
    std::map<core::AgentId, core::Action> actions;
    actions["a"] = core::DefinitiveAction{"42", ""};
    actions["b"] = core::DefinitiveAction{"41", ""};
    actions["c"] = core::DefinitiveAction{"", ""};  // abstention
    actions["d"] = core::DefinitiveAction{"42", ""};
    CHECK(engine::consensus_accuracy(actions, std::string("42")) == core::Fraction(1, 2));
    CHECK(engine::consensus_accuracy(actions, std::string("Forty  ")) == core::Fraction(0));
    CHECK_THROWS_AS(engine::consensus_accuracy(actions, std::nullopt),
                    engine::AccuracyUnavailableError);
}
