#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "delib/cli/scenario.hpp"
#include "delib/core/fraction.hpp"
#include "delib/ledger/block.hpp"
#include "delib/net/codec.hpp"

namespace {

using delib::core::Fraction;
using nlohmann::json;

std::string ratio(const Fraction& f) {
    return std::to_string(f.numerator()) + "/" + std::to_string(f.denominator());
}

json action_json(const delib::core::Action& action) {
    if (const auto* definitive = std::get_if<delib::core::DefinitiveAction>(&action)) {
        return {{"type", "definitive"},
                {"value", definitive->value},
                {"argument", definitive->argument}};
    }
    const auto& prioritized = std::get<delib::core::PrioritizedAction>(action);
    return {{"type", "prioritized"}, {"policies", prioritized.policies}};
}

json block_json(const delib::ledger::Block& block) {
    const auto& record = block.record;
    json rounds = json::array();
    for (const auto& round : record.actions_by_round) {
        json entry = json::object();
        for (const auto& [agent, action] : round) entry[agent] = action_json(action);
        rounds.push_back(std::move(entry));
    }
    json payoffs = json::array();
    for (const auto& p : record.payoff) payoffs.push_back(ratio(p));
    json transcript = json::array();
    for (const auto& utterance : block.transcript) {
        transcript.push_back({{"round", static_cast<int>(utterance.round)},
                              {"turn", utterance.turn},
                              {"agent", utterance.agent.hex()},
                              {"body_bytes", utterance.body.size()}});
    }
    return {
        {"height", block.header.height},
        {"previous", delib::net::to_hex(
                         std::span(block.header.previous.data(), block.header.previous.size()))},
        {"timestamp", block.header.timestamp},
        {"outcome", record.outcome.success() ? "success" : "hung"},
        {"problem",
         {{"id", record.problem.id},
          {"kind",
           record.problem.kind == delib::core::ProblemKind::Definitive ? "definitive"
                                                                       : "prioritized"}}},
        {"agents", record.agents},
        {"confidence", ratio(record.confidence)},
        {"theta", ratio(record.theta)},
        {"completed_at", record.completed_at},
        {"payoffs", payoffs},
        {"rounds", rounds},
        {"transcript", transcript},
    };
}

int cmd_run(const std::string& scenario_path) {
    try {
        auto scenario = delib::cli::load_scenario(scenario_path);
        delib::cli::apply_env_overrides(scenario);
        auto report = delib::cli::run_scenario(scenario);
        std::cout << "runs " << report.runs << ": " << report.successes << " success, "
                  << report.hung << " hung, " << report.refused << " refused\n";
        std::cout << "metrics " << report.metrics_path.string() << "\n";
        std::cout << "chains " << report.chain_paths.size() << " file(s), keys "
                  << report.identities_path.string() << "\n";
        if (!report.ok()) {
            std::cerr << "error: " << report.chain_failures
                      << " chain file(s) failed verification\n";
            return 1;
        }
        return 0;
    } catch (const delib::cli::ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_verify(const std::string& chain_path, std::string keys_path) {
    try {
        if (keys_path.empty()) {
            keys_path = (std::filesystem::path(chain_path).parent_path() / "identities.json")
                            .string();
        }
        auto directory = delib::cli::load_directory(keys_path);
        auto check = delib::cli::verify_chain_file(chain_path, directory);
        if (check.ok) {
            std::cout << "ok: " << check.height << " block(s) verified\n";
            return 0;
        }
        std::cout << "invalid block at height " << check.failed_height << ": " << check.detail
                  << "\n";
        return 1;
    } catch (const delib::cli::ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_inspect(const std::string& chain_path, std::uint64_t height) {
    std::ifstream file(chain_path, std::ios::binary);
    if (!file) {
        std::cerr << "error: cannot open chain file: " << chain_path << "\n";
        return 2;
    }
    delib::net::Bytes bytes((std::istreambuf_iterator<char>(file)),
                            std::istreambuf_iterator<char>());
    try {
        delib::net::Reader reader(bytes);
        std::uint64_t current = 0;
        while (!reader.done()) {
            auto frame = reader.var_bytes();
            if (++current == height) {
                auto block = delib::ledger::deserialize_block(frame);
                std::cout << block_json(block).dump(2) << "\n";
                return 0;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: chain file is corrupt: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no block at height " << height << "\n";
    return 2;
}

int cmd_metrics(const std::string& dir) {
    auto path = std::filesystem::path(dir) / "metrics.tsv";
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        std::cerr << "error: cannot open " << path.string() << "\n";
        return 2;
    }
    std::string line;
    if (!std::getline(file, line)) {
        std::cerr << "error: empty metrics file\n";
        return 1;
    }
    std::size_t runs = 0, successes = 0, hung = 0, refused = 0;
    double latency_sum = 0.0, confidence_sum = 0.0;
    std::uint64_t block_bytes = 0;
    while (std::getline(file, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream row(line);
        std::string field;
        while (std::getline(row, field, '\t')) fields.push_back(field);
        if (fields.size() < 15) {
            std::cerr << "error: malformed metrics row\n";
            return 1;
        }
        ++runs;
        const std::string& status = fields[5];
        if (status == "success") {
            ++successes;
            confidence_sum += std::stod(fields[7]);
        } else if (status == "refused") {
            ++refused;
        } else {
            ++hung;
        }
        if (status != "refused") {
            latency_sum += std::stod(fields[14]);
            block_bytes += std::stoull(fields[9]);
        }
    }
    std::cout << "runs " << runs << ": " << successes << " success, " << hung << " hung, "
              << refused << " refused\n";
    std::size_t completed = successes + hung;
    if (completed > 0) {
        std::cout << "mean total latency " << latency_sum / static_cast<double>(completed)
                  << "\n";
        std::cout << "mean block size "
                  << block_bytes / static_cast<std::uint64_t>(completed) << " bytes\n";
    }
    if (successes > 0) {
        std::cout << "mean confidence " << confidence_sum / static_cast<double>(successes)
                  << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deliberation engine over a simulated gossip network"};
    app.require_subcommand(1);

    std::string scenario_path;
    auto* run = app.add_subcommand("run", "run a scenario, writing chains and metrics");
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();

    std::string chain_path;
    std::string keys_path;
    auto* verify = app.add_subcommand("verify-chain", "replay and verify a chain file");
    verify->add_option("chain", chain_path, "chain file")->required();
    verify->add_option("--keys", keys_path,
                       "public-key JSON (default: identities.json beside the chain)");

    std::string inspect_path;
    std::uint64_t inspect_height = 0;
    auto* inspect = app.add_subcommand("inspect-block", "print one block as JSON");
    inspect->add_option("chain", inspect_path, "chain file")->required();
    inspect->add_option("height", inspect_height, "1-based block height")->required();

    std::string metrics_dir;
    auto* metrics = app.add_subcommand("metrics", "summarize a run's metrics.tsv");
    metrics->add_option("dir", metrics_dir, "output directory of a previous run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // anything but help is a usage error
    }

    if (*run) return cmd_run(scenario_path);
    if (*verify) return cmd_verify(chain_path, keys_path);
    if (*inspect) return cmd_inspect(inspect_path, inspect_height);
    if (*metrics) return cmd_metrics(metrics_dir);
    return 2;
}
