#include "delib/cli/scenario.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "delib/agent/behavior.hpp"
#include "delib/agent/prompt.hpp"
#include "delib/core/rng.hpp"
#include "delib/ledger/chain.hpp"
#include "json.hpp"

namespace delib::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& message) {
    throw ScenarioError(origin + ": " + message);
}

core::Fraction parse_fraction(const json& value, const std::string& origin,
                              const std::string& key) {
    try {
        if (value.is_string()) {
            const auto text = value.get<std::string>();
            auto slash = text.find('/');
            if (slash != std::string::npos) {
                std::int64_t num = std::stoll(text.substr(0, slash));
                std::int64_t den = std::stoll(text.substr(slash + 1));
                if (den == 0) throw std::invalid_argument("zero denominator");
                return core::Fraction(num, den);
            }
            return core::fraction_from_decimal(text);
        }
        if (value.is_number()) {
            // dump() renders the shortest decimal that round-trips, which
            // fraction parsing then makes exact.
            return core::fraction_from_decimal(value.dump());
        }
    } catch (const std::exception& e) {
        fail(origin, key + ": " + e.what());
    }
    fail(origin, key + " must be a number or a decimal/ratio string");
}

double require_number(const json& object, const char* key, double fallback,
                      const std::string& origin) {
    if (!object.contains(key)) return fallback;
    if (!object.at(key).is_number()) fail(origin, std::string(key) + " must be a number");
    return object.at(key).get<double>();
}

std::uint64_t require_unsigned(const json& object, const char* key, std::uint64_t fallback,
                               const std::string& origin) {
    if (!object.contains(key)) return fallback;
    const auto& value = object.at(key);
    if (!value.is_number_unsigned()) {
        fail(origin, std::string(key) + " must be a non-negative integer");
    }
    return value.get<std::uint64_t>();
}

std::string require_string(const json& object, const char* key, const std::string& fallback,
                           const std::string& origin) {
    if (!object.contains(key)) return fallback;
    if (!object.at(key).is_string()) fail(origin, std::string(key) + " must be a string");
    return object.at(key).get<std::string>();
}

std::vector<std::string> string_list(const json& value, const std::string& origin,
                                     const std::string& key) {
    if (!value.is_array()) fail(origin, key + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& entry : value) {
        if (!entry.is_string()) fail(origin, key + " must contain only strings");
        out.push_back(entry.get<std::string>());
    }
    return out;
}

AgentBlueprint parse_blueprint(const json& object, const std::string& origin) {
    AgentBlueprint bp;
    bp.behavior = require_string(object, "behavior", "convergent", origin);
    static const std::set<std::string> kKnown = {"convergent", "stubborn", "scripted",
                                                 "unavailable", "remote"};
    if (!kKnown.count(bp.behavior)) fail(origin, "unknown behavior '" + bp.behavior + "'");
    bp.identity_tag = require_unsigned(object, "identity_tag", 0, origin);
    bp.p_adopt = require_number(object, "p_adopt", 1.0, origin);
    if (bp.p_adopt < 0.0 || bp.p_adopt > 1.0) fail(origin, "p_adopt must be in [0,1]");
    if (object.contains("correct")) {
        if (!object.at("correct").is_boolean()) fail(origin, "correct must be a boolean");
        bp.correct = object.at("correct").get<bool>();
    }
    bp.value = require_string(object, "value", "", origin);
    if (object.contains("policies")) {
        bp.policies = string_list(object.at("policies"), origin, "policies");
    }
    if (object.contains("script")) bp.script = string_list(object.at("script"), origin, "script");
    if (object.contains("remote")) {
        const auto& remote = object.at("remote");
        if (!remote.is_object()) fail(origin, "remote must be an object");
        bp.remote.host = require_string(remote, "host", bp.remote.host, origin);
        bp.remote.port = static_cast<int>(require_unsigned(remote, "port",
                                                           static_cast<std::uint64_t>(bp.remote.port),
                                                           origin));
        bp.remote.path = require_string(remote, "path", bp.remote.path, origin);
        bp.remote.model = require_string(remote, "model", bp.remote.model, origin);
        bp.remote.timeout_ms = static_cast<int>(require_unsigned(
            remote, "timeout_ms", static_cast<std::uint64_t>(bp.remote.timeout_ms), origin));
    }
    return bp;
}

std::string reason_text(core::HungReason reason) {
    switch (reason) {
        case core::HungReason::None: return "none";
        case core::HungReason::Timeout: return "timeout";
        case core::HungReason::Exhausted: return "exhausted";
        case core::HungReason::Participation: return "participation";
        case core::HungReason::Oversize: return "oversize";
    }
    return "unknown";
}

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.6f", value);
    return buffer;
}

std::unique_ptr<agent::Behavior> build_behavior(const AgentBlueprint& bp,
                                                const core::Problem& problem,
                                                std::uint64_t behavior_seed) {
    auto initial_action = [&]() -> core::Action {
        if (problem.kind == core::ProblemKind::Prioritized) {
            if (bp.policies.empty()) {
                throw ScenarioError("agent for prioritized problem '" + problem.id +
                                    "' has no policies");
            }
            return core::PrioritizedAction{bp.policies};
        }
        if (bp.value.empty()) {
            throw ScenarioError("agent for definitive problem '" + problem.id +
                                "' has no starting value");
        }
        return core::DefinitiveAction{bp.value, "starting position"};
    };
    if (bp.behavior == "convergent") {
        return std::make_unique<agent::ConvergentBehavior>(initial_action(), bp.p_adopt,
                                                           behavior_seed);
    }
    if (bp.behavior == "stubborn") {
        return std::make_unique<agent::StubbornBehavior>(initial_action());
    }
    if (bp.behavior == "scripted") {
        if (bp.script.empty()) throw ScenarioError("scripted agent has an empty script");
        return std::make_unique<agent::ScriptedBehavior>(bp.script);
    }
    if (bp.behavior == "unavailable") return std::make_unique<agent::UnavailableBehavior>();
    if (bp.behavior == "remote") return std::make_unique<agent::RemoteBehavior>(bp.remote);
    throw ScenarioError("unknown behavior '" + bp.behavior + "'");
}

}  // namespace

std::vector<AgentBlueprint> Scenario::roster_for(std::size_t agent_count,
                                                 const core::Problem& problem) const {
    std::vector<AgentBlueprint> roster;
    if (!explicit_agents.empty()) {
        if (explicit_agents.size() != agent_count) {
            throw ScenarioError("explicit agent list does not match the requested count");
        }
        roster = explicit_agents;
    } else {
        roster.assign(agent_count, agent_template);
        for (std::size_t i = 0; i < agent_count; ++i) {
            roster[i].identity_tag = i + 1;
            if (agent_template.behavior == "convergent" || agent_template.behavior == "stubborn") {
                if (problem.kind == core::ProblemKind::Prioritized) {
                    if (policy_sets.empty()) {
                        throw ScenarioError("prioritized problems need policy_sets");
                    }
                    roster[i].policies = policy_sets[i % policy_sets.size()];
                } else {
                    roster[i].correct = i < template_correct;
                    if (roster[i].correct) {
                        if (!problem.ground_truth.has_value()) {
                            throw ScenarioError("correct_count needs a ground truth on problem '" +
                                                problem.id + "'");
                        }
                        roster[i].value = *problem.ground_truth;
                    } else if (!incorrect_values.empty()) {
                        roster[i].value = incorrect_values[i % incorrect_values.size()];
                    } else if (roster[i].value.empty()) {
                        roster[i].value = "alternative " + std::to_string(i + 1);
                    }
                }
            }
        }
    }
    for (std::size_t i = 0; i < roster.size(); ++i) {
        if (roster[i].identity_tag == 0) roster[i].identity_tag = i + 1;
    }
    return roster;
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(origin, e.what());  // nlohmann reports line and column
    }
    if (!root.is_object()) fail(origin, "top level must be an object");

    Scenario scenario;
    if (!root.contains("seed")) fail(origin, "seed is required");
    scenario.seed = require_unsigned(root, "seed", 0, origin);
    scenario.output_dir = require_string(root, "output_dir", "out", origin);

    if (!root.contains("problems") || !root.at("problems").is_array() ||
        root.at("problems").empty()) {
        fail(origin, "problems must be a non-empty array");
    }
    for (const auto& entry : root.at("problems")) {
        if (!entry.is_object()) fail(origin, "each problem must be an object");
        core::Problem problem;
        problem.id = require_string(entry, "id", "", origin);
        if (problem.id.empty()) fail(origin, "every problem needs a non-empty id");
        problem.statement = require_string(entry, "statement", "", origin);
        auto kind = require_string(entry, "kind", "definitive", origin);
        if (kind == "definitive") {
            problem.kind = core::ProblemKind::Definitive;
        } else if (kind == "prioritized") {
            problem.kind = core::ProblemKind::Prioritized;
        } else {
            fail(origin, "problem kind must be definitive or prioritized");
        }
        auto truth = require_string(entry, "ground_truth", "", origin);
        if (!truth.empty()) problem.ground_truth = truth;
        scenario.problems.push_back(std::move(problem));
    }

    std::optional<std::size_t> template_count;
    if (root.contains("agents")) {
        const auto& agents = root.at("agents");
        if (agents.is_array()) {
            if (agents.empty()) fail(origin, "agents array must not be empty");
            std::size_t index = 0;
            for (const auto& entry : agents) {
                if (!entry.is_object()) fail(origin, "each agent must be an object");
                auto bp = parse_blueprint(entry, origin);
                if (bp.identity_tag == 0) bp.identity_tag = index + 1;
                scenario.explicit_agents.push_back(std::move(bp));
                ++index;
            }
        } else if (agents.is_object()) {
            scenario.has_template = true;
            scenario.agent_template = parse_blueprint(agents, origin);
            if (agents.contains("count")) {
                auto count = require_unsigned(agents, "count", 0, origin);
                if (count == 0) fail(origin, "agents.count must be positive");
                template_count = static_cast<std::size_t>(count);
            }
            scenario.template_correct = static_cast<std::size_t>(
                require_unsigned(agents, "correct_count", 0, origin));
            if (agents.contains("incorrect_values")) {
                scenario.incorrect_values =
                    string_list(agents.at("incorrect_values"), origin, "incorrect_values");
            }
            if (agents.contains("policy_sets")) {
                const auto& sets = agents.at("policy_sets");
                if (!sets.is_array()) fail(origin, "policy_sets must be an array of arrays");
                for (const auto& one : sets) {
                    scenario.policy_sets.push_back(string_list(one, origin, "policy_sets"));
                }
            }
        } else {
            fail(origin, "agents must be an object template or an array");
        }
    } else {
        fail(origin, "agents is required");
    }

    auto default_turns = static_cast<std::uint32_t>(require_unsigned(root, "turns", 3, origin));
    if (root.contains("sweep")) {
        const auto& sweep = root.at("sweep");
        if (!sweep.is_object()) fail(origin, "sweep must be an object");
        if (sweep.contains("agents")) {
            for (const auto& value : sweep.at("agents")) {
                if (!value.is_number_unsigned() || value.get<std::uint64_t>() == 0) {
                    fail(origin, "sweep.agents must hold positive integers");
                }
                scenario.sweep_agents.push_back(value.get<std::size_t>());
            }
        }
        if (sweep.contains("turns")) {
            for (const auto& value : sweep.at("turns")) {
                if (!value.is_number_unsigned() || value.get<std::uint64_t>() == 0) {
                    fail(origin, "sweep.turns must hold positive integers");
                }
                scenario.sweep_turns.push_back(value.get<std::uint32_t>());
            }
        }
    }
    if (scenario.sweep_agents.empty()) {
        if (!scenario.explicit_agents.empty()) {
            scenario.sweep_agents.push_back(scenario.explicit_agents.size());
        } else if (template_count.has_value()) {
            scenario.sweep_agents.push_back(*template_count);
        } else {
            fail(origin, "agent count is undetermined: set agents.count or sweep.agents");
        }
    }
    if (!scenario.explicit_agents.empty()) {
        for (auto n : scenario.sweep_agents) {
            if (n != scenario.explicit_agents.size()) {
                fail(origin, "sweep.agents conflicts with the explicit agent list");
            }
        }
    }
    if (scenario.sweep_turns.empty()) scenario.sweep_turns.push_back(default_turns);

    if (root.contains("theta")) {
        scenario.theta = parse_fraction(root.at("theta"), origin, "theta");
    }
    if (scenario.theta <= core::Fraction(0) || scenario.theta > core::Fraction(1)) {
        fail(origin, "theta must be in (0,1]");
    }
    scenario.timeout = require_number(root, "timeout", 0.0, origin);
    if (scenario.timeout < 0) fail(origin, "timeout must be non-negative");
    scenario.min_participants = static_cast<std::size_t>(
        require_unsigned(root, "min_participants", 0, origin));
    scenario.cot_fraction = require_number(root, "cot_fraction", 0.5, origin);
    if (scenario.cot_fraction < 0 || scenario.cot_fraction > 1) {
        fail(origin, "cot_fraction must be in [0,1]");
    }
    scenario.pgt_bytes_per_unit = static_cast<std::size_t>(
        require_unsigned(root, "pgt_bytes_per_unit", 256, origin));
    if (scenario.pgt_bytes_per_unit == 0) fail(origin, "pgt_bytes_per_unit must be positive");
    scenario.repeats = static_cast<std::size_t>(require_unsigned(root, "repeats", 1, origin));
    if (scenario.repeats == 0) fail(origin, "repeats must be positive");

    if (root.contains("network")) {
        const auto& network = root.at("network");
        if (!network.is_object()) fail(origin, "network must be an object");
        if (network.contains("latency")) {
            const auto& latency = network.at("latency");
            if (!latency.is_array() || latency.size() != 2 || !latency[0].is_number() ||
                !latency[1].is_number()) {
                fail(origin, "network.latency must be [min, max]");
            }
            scenario.network.latency_min = latency[0].get<double>();
            scenario.network.latency_max = latency[1].get<double>();
        }
        scenario.network.drop_probability =
            require_number(network, "drop", scenario.network.drop_probability, origin);
        scenario.network.request_retry_delay = require_number(
            network, "request_retry_delay", scenario.network.request_retry_delay, origin);
        if (scenario.network.latency_min < 0 ||
            scenario.network.latency_max < scenario.network.latency_min) {
            fail(origin, "network.latency must satisfy 0 <= min <= max");
        }
        if (scenario.network.drop_probability < 0 || scenario.network.drop_probability > 1) {
            fail(origin, "network.drop must be in [0,1]");
        }
        if (scenario.network.request_retry_delay < 0) {
            fail(origin, "network.request_retry_delay must be non-negative");
        }
    }
    return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw ScenarioError("cannot open scenario file: " + path.string());
    std::stringstream buffer;
    buffer << file.rdbuf();
    return parse_scenario(buffer.str(), path.filename().string());
}

void apply_env_overrides(Scenario& scenario) {
    if (const char* seed_text = std::getenv("DELIB_SEED")) {
        try {
            std::size_t used = 0;
            std::string text(seed_text);
            // stoull tolerates a leading minus by wrapping; reject it.
            if (text.empty() || text[0] == '-') throw std::invalid_argument("negative");
            auto seed = std::stoull(text, &used);
            if (used != text.size()) throw std::invalid_argument("trailing characters");
            scenario.seed = seed;
        } catch (const std::exception&) {
            throw ScenarioError("DELIB_SEED must be a non-negative integer");
        }
    }
    if (const char* dir = std::getenv("DELIB_OUTPUT_DIR")) {
        if (*dir == '\0') throw ScenarioError("DELIB_OUTPUT_DIR must not be empty");
        scenario.output_dir = dir;
    }
}

std::string metrics_tsv(const std::vector<RunRow>& rows) {
    std::string out =
        "problem\tdeliberation\tagents\tturns_configured\tturns_executed\tstatus\treason"
        "\tconfidence\tparticipation\tblock_size\tblock_mismatches\tinitial_latency"
        "\treflection_latency\tprompt_time\ttotal_latency\tper_turn_accuracy\n";
    for (const auto& row : rows) {
        const auto& m = row.metrics;
        out += row.problem_id;
        out += '\t';
        out += m.deliberation_id;
        out += '\t';
        out += std::to_string(row.agent_count);
        out += '\t';
        out += std::to_string(row.turns_configured);
        out += '\t';
        out += std::to_string(m.turns_executed);
        out += '\t';
        out += row.refused ? "refused" : (m.outcome.success() ? "success" : "hung");
        out += '\t';
        out += row.refused ? "none" : reason_text(m.outcome.reason);
        out += '\t';
        out += core::fraction_to_decimal(m.confidence);
        out += '\t';
        out += core::fraction_to_decimal(m.participation);
        out += '\t';
        out += std::to_string(m.block_size);
        out += '\t';
        out += std::to_string(m.block_mismatches);
        out += '\t';
        out += format_double(m.initial_round_latency);
        out += '\t';
        out += format_double(m.reflection_latency);
        out += '\t';
        out += format_double(m.prompt_generation_time);
        out += '\t';
        out += format_double(m.total_latency);
        out += '\t';
        for (std::size_t i = 0; i < m.per_turn_accuracy.size(); ++i) {
            if (i > 0) out += ';';
            out += core::fraction_to_decimal(m.per_turn_accuracy[i]);
        }
        out += '\n';
    }
    return out;
}

void save_directory(const net::Directory& directory, const std::filesystem::path& path) {
    json entries = json::array();
    for (const auto& [id, key] : directory.entries()) {
        entries.push_back({{"id", id.hex()},
                           {"public_key", net::to_hex(std::span(key.data(), key.size()))}});
    }
    json root = {{"identities", entries}};
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ScenarioError("cannot write " + path.string());
    file << root.dump(2) << '\n';
}

net::Directory load_directory(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw ScenarioError("cannot open key file: " + path.string());
    json root;
    try {
        root = json::parse(file);
    } catch (const json::parse_error& e) {
        throw ScenarioError("key file " + path.string() + ": " + e.what());
    }
    net::Directory directory;
    if (!root.is_object() || !root.contains("identities") || !root.at("identities").is_array()) {
        throw ScenarioError("key file " + path.string() + ": identities array missing");
    }
    for (const auto& entry : root.at("identities")) {
        try {
            auto id = net::NodeId::from_hex(entry.at("id").get<std::string>());
            auto key_bytes = net::from_hex(entry.at("public_key").get<std::string>());
            if (key_bytes.size() != 32) throw ScenarioError("public key must be 32 bytes");
            net::PublicKey key{};
            std::copy(key_bytes.begin(), key_bytes.end(), key.begin());
            directory.add(id, key);
        } catch (const std::exception& e) {
            throw ScenarioError("key file " + path.string() + ": " + e.what());
        }
    }
    return directory;
}

ScenarioReport run_scenario(const Scenario& scenario) {
    std::filesystem::create_directories(scenario.output_dir);
    ScenarioReport report;
    net::Directory all_identities;

    std::size_t cell_index = 0;
    for (auto agent_count : scenario.sweep_agents) {
        for (auto turns : scenario.sweep_turns) {
            engine::Session session(scenario.seed, agent_count);
            std::map<std::string, std::size_t> attempts;
            std::uint64_t cell_seed =
                core::derive_seed(scenario.seed, "cell", agent_count, turns);

            std::size_t run_index = 0;
            for (const auto& problem : scenario.problems) {
                for (std::size_t repeat = 0; repeat < scenario.repeats; ++repeat, ++run_index) {
                    auto roster = scenario.roster_for(agent_count, problem);
                    auto styles =
                        agent::assign_prompt_styles(agent_count, scenario.cot_fraction);

                    engine::DeliberationConfig config;
                    config.seed = core::derive_seed(cell_seed, "run", run_index);
                    config.deliberation_id =
                        problem.id + "#" + std::to_string(attempts[problem.id]++);
                    config.max_turns = turns;
                    config.theta = scenario.theta;
                    config.timeout = scenario.timeout;
                    config.min_participants = scenario.min_participants;
                    config.pgt_bytes_per_unit = scenario.pgt_bytes_per_unit;
                    config.transport.latency_min = scenario.network.latency_min;
                    config.transport.latency_max = scenario.network.latency_max;
                    config.transport.drop_probability = scenario.network.drop_probability;
                    config.gossip.request_retry_delay = scenario.network.request_retry_delay;
                    for (std::size_t i = 0; i < roster.size(); ++i) {
                        engine::AgentSpec agent_spec;
                        agent_spec.identity_tag = roster[i].identity_tag;
                        agent_spec.style = styles[i];
                        agent_spec.behavior = build_behavior(
                            roster[i], problem, core::derive_seed(config.seed, "behavior", i));
                        config.agents.push_back(std::move(agent_spec));
                    }

                    auto result = engine::run_deliberation(session, std::move(config), problem);
                    RunRow row;
                    row.problem_id = problem.id;
                    row.agent_count = agent_count;
                    row.turns_configured = turns;
                    row.refused = result.status == engine::RunStatus::Refused;
                    row.metrics = result.metrics;
                    if (row.refused) {
                        ++report.refused;
                    } else if (result.metrics.outcome.success()) {
                        ++report.successes;
                    } else {
                        ++report.hung;
                    }
                    ++report.runs;
                    report.rows.push_back(std::move(row));
                }
            }

            for (std::size_t node = 0; node < agent_count; ++node) {
                auto name = "chain-a" + std::to_string(agent_count) + "-t" +
                            std::to_string(turns) + "-node" + std::to_string(node) + ".bin";
                auto path = scenario.output_dir / name;
                session.chain(node).save(path);
                report.chain_paths.push_back(path);
            }
            for (const auto& [id, key] : session.directory().entries()) {
                all_identities.add(id, key);
            }
            ++cell_index;
        }
    }
    (void)cell_index;

    report.identities_path = scenario.output_dir / "identities.json";
    save_directory(all_identities, report.identities_path);
    report.metrics_path = scenario.output_dir / "metrics.tsv";
    {
        std::ofstream file(report.metrics_path, std::ios::binary);
        if (!file) throw ScenarioError("cannot write " + report.metrics_path.string());
        file << metrics_tsv(report.rows);
    }

    for (const auto& path : report.chain_paths) {
        auto check = verify_chain_file(path, all_identities);
        if (!check.ok) ++report.chain_failures;
    }
    return report;
}

ChainCheck verify_chain_file(const std::filesystem::path& chain_path,
                             const net::Directory& directory) {
    try {
        auto replay = ledger::replay_chain_file(chain_path, &directory);
        ChainCheck check;
        check.ok = replay.ok;
        check.height = replay.chain.height();
        check.failed_height = replay.failed_height;
        if (!replay.ok) {
            check.detail =
                ledger::to_string(replay.failure.reason) + ": " + replay.failure.detail;
        }
        return check;
    } catch (const std::exception& e) {
        throw ScenarioError(e.what());
    }
}

}  // namespace delib::cli
