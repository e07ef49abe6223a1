#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "delib/agent/remote.hpp"
#include "delib/core/fraction.hpp"
#include "delib/core/types.hpp"
#include "delib/engine/engine.hpp"
#include "delib/net/identity.hpp"

namespace delib::cli {

// Configuration problems: unreadable files, malformed JSON, out-of-range
// values. Callers map these to usage-error exits.
class ScenarioError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Recipe for one agent slot; behaviors are constructed fresh per run.
struct AgentBlueprint {
    std::string behavior = "convergent";  // convergent|stubborn|scripted|unavailable|remote
    std::uint64_t identity_tag = 0;
    double p_adopt = 1.0;
    bool correct = false;                // convergent: start at the ground truth
    std::string value;                   // definitive starting value
    std::vector<std::string> policies;   // prioritized starting policies
    std::vector<std::string> script;
    agent::RemoteEndpoint remote;
};

struct NetworkSettings {
    double latency_min = 1.0;
    double latency_max = 3.0;
    double drop_probability = 0.0;
    double request_retry_delay = 10.0;
};

struct Scenario {
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "out";
    std::vector<core::Problem> problems;

    // Either an explicit roster, or a template expanded per sweep cell.
    std::vector<AgentBlueprint> explicit_agents;
    AgentBlueprint agent_template;
    std::size_t template_correct = 0;                 // convergent template
    std::vector<std::string> incorrect_values;        // cycled over wrong starters
    std::vector<std::vector<std::string>> policy_sets;  // cycled, prioritized problems
    bool has_template = false;

    std::vector<std::size_t> sweep_agents;   // at least one entry
    std::vector<std::uint32_t> sweep_turns;  // at least one entry
    core::Fraction theta{1, 2};
    double timeout = 0.0;
    std::size_t min_participants = 0;
    double cot_fraction = 0.5;
    std::size_t pgt_bytes_per_unit = 256;
    std::size_t repeats = 1;
    NetworkSettings network;

    // Expands the roster for one cell; validates against the problem kind.
    std::vector<AgentBlueprint> roster_for(std::size_t agent_count,
                                           const core::Problem& problem) const;
};

Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text, const std::string& origin = "scenario");

// DELIB_SEED and DELIB_OUTPUT_DIR override the corresponding fields when set.
void apply_env_overrides(Scenario& scenario);

// One TSV row per deliberation run.
struct RunRow {
    std::string problem_id;
    std::size_t agent_count = 0;
    std::uint32_t turns_configured = 0;
    bool refused = false;
    engine::MetricsSample metrics;
};

struct ScenarioReport {
    std::size_t runs = 0;
    std::size_t successes = 0;
    std::size_t hung = 0;
    std::size_t refused = 0;
    std::size_t chain_failures = 0;  // written chain files that fail replay
    std::filesystem::path metrics_path;
    std::filesystem::path identities_path;
    std::vector<std::filesystem::path> chain_paths;
    std::vector<RunRow> rows;

    bool ok() const { return chain_failures == 0; }
};

// Runs every sweep cell (agent count x turns), appending one block per run
// to each node's chain, then writes per-node chain files, the public-key
// sidecar, and the metrics table, and finally re-verifies every written
// chain from disk.
ScenarioReport run_scenario(const Scenario& scenario);

// Serialization of the run metrics table; stable bytes for a given report.
std::string metrics_tsv(const std::vector<RunRow>& rows);

// Public-key sidecar written next to chain files so they stay verifiable
// without re-deriving identities.
void save_directory(const net::Directory& directory, const std::filesystem::path& path);
net::Directory load_directory(const std::filesystem::path& path);

struct ChainCheck {
    bool ok = false;
    std::uint64_t height = 0;         // blocks accepted
    std::uint64_t failed_height = 0;  // 0 when ok
    std::string detail;
};

ChainCheck verify_chain_file(const std::filesystem::path& chain_path,
                             const net::Directory& directory);

}  // namespace delib::cli
