#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "delib/core/types.hpp"
#include "delib/engine/config.hpp"
#include "delib/engine/metrics.hpp"
#include "delib/ledger/block.hpp"
#include "delib/ledger/chain.hpp"
#include "delib/net/identity.hpp"

namespace delib::engine {

// State shared across deliberations: one chain per node slot, the key
// directory (accumulates identities across agent swaps so historical
// blocks keep verifying), and the failed-set memory that gates restarts.
class Session {
  public:
    Session(std::uint64_t seed, std::size_t node_count);

    // Chains point into directory_, so the session must stay put.
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    // Derives and registers the identity for every tag. Idempotent.
    void register_tags(const std::vector<std::uint64_t>& tags);

    std::uint64_t seed() const { return seed_; }
    std::size_t node_count() const { return chains_.size(); }
    net::Directory& directory() { return directory_; }
    ledger::Chain& chain(std::size_t node) { return chains_.at(node); }
    std::vector<ledger::Chain>& chains() { return chains_; }
    core::HungSet& hung() { return hung_; }

  private:
    std::uint64_t seed_;
    net::Directory directory_;
    std::vector<ledger::Chain> chains_;
    core::HungSet hung_;
};

enum class RunStatus : std::uint8_t {
    Completed = 0,  // one block appended to every chain
    Refused = 1,    // start criteria rejected the roster; nothing happened
};

struct RunResult {
    RunStatus status = RunStatus::Completed;
    core::DeliberationRecord record;  // proposer's record (empty when Refused)
    ledger::Block proposer_block;
    MetricsSample metrics;
    // Proposer-view action maps per evaluated turn, kept even for hung
    // outcomes (the on-chain record drops them).
    std::vector<std::map<core::AgentId, core::Action>> turn_actions;
};

// Runs one full deliberation: start gate, initial round, reflection turns
// with per-turn consensus evaluation on the proposer's view, then the
// conclusion that builds, appends, and cross-checks one block per node.
// The config's agent count must match the session's node count.
RunResult run_deliberation(Session& session, DeliberationConfig config,
                           const core::Problem& problem);

}  // namespace delib::engine
