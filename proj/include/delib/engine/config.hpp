#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "delib/agent/behavior.hpp"
#include "delib/agent/prompt.hpp"
#include "delib/core/fraction.hpp"
#include "delib/net/gossip.hpp"
#include "delib/net/transport.hpp"

namespace delib::engine {

enum class HonestyLabel : std::uint8_t { Honest = 0, Adversarial = 1 };

// One participant slot. The identity tag pins the keypair (via the scenario
// seed); the behavior is consumed by a single deliberation.
struct AgentSpec {
    std::uint64_t identity_tag = 0;
    std::unique_ptr<agent::Behavior> behavior;
    agent::PromptStyle style = agent::PromptStyle::ZeroShot;
    HonestyLabel honesty = HonestyLabel::Honest;
};

struct DeliberationConfig {
    std::vector<AgentSpec> agents;
    std::uint32_t max_turns = 3;  // T, reflection turns
    // Logical deadline. 0 picks the default: 50 x the per-turn gossip
    // quiescence bound (4 latency hops plus the request retry delay).
    double timeout = 0.0;
    core::Fraction theta{1, 2};
    // Turns hang when fewer agents than this respond; 0 means all agents.
    std::size_t min_participants = 0;
    std::uint64_t seed = 0;
    std::string deliberation_id;  // empty -> "<problem id>#0"
    net::TransportConfig transport;
    net::GossipConfig gossip;
    // Logical prompt-generation cost: one clock unit per this many prompt
    // bytes (rounded up per prompt).
    std::size_t pgt_bytes_per_unit = 256;
};

}  // namespace delib::engine
