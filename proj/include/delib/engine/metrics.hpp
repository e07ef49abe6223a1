#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "delib/core/fraction.hpp"
#include "delib/core/types.hpp"

namespace delib::engine {

class AccuracyUnavailableError : public std::runtime_error {
  public:
    AccuracyUnavailableError() : std::runtime_error("problem has no ground truth") {}
};

// Fraction of listed agents whose definitive value matches the ground
// truth after normalization. Abstentions and prioritized actions count
// as misses. Throws AccuracyUnavailableError when truth is absent.
core::Fraction consensus_accuracy(const std::map<core::AgentId, core::Action>& actions,
                                  const std::optional<std::string>& ground_truth);

// Timing values are in logical clock units of the simulated transport.
struct MetricsSample {
    std::string deliberation_id;
    std::size_t agent_count = 0;
    std::uint32_t turns_configured = 0;
    std::uint32_t turns_executed = 0;  // reflection turns that actually ran
    // Entry k is the accuracy after turn k (0 = initial round). Empty when
    // the problem carries no ground truth.
    std::vector<core::Fraction> per_turn_accuracy;
    double initial_round_latency = 0.0;
    double reflection_latency = 0.0;
    double prompt_generation_time = 0.0;  // subset of the two phases above
    double total_latency = 0.0;           // initial + reflection
    std::size_t block_size = 0;
    core::Fraction participation{0};  // min responders/agents over evaluated turns
    core::Fraction confidence{0};
    core::Outcome outcome;
    // Nodes whose locally built block differed from the proposer's bytes.
    std::size_t block_mismatches = 0;
};

}  // namespace delib::engine
