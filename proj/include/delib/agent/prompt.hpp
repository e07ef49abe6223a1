#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "delib/core/types.hpp"

namespace delib::agent {

enum class PromptStyle { ChainOfThought, ZeroShot };

// A previous-turn response as seen by the prompt builder. `agent` is the
// speaker's id; `body` is the raw utterance text.
struct PrevResponse {
    core::AgentId agent;
    std::string body;

    bool operator==(const PrevResponse&) const = default;
};

// Rendered prompt plus the structured context it was rendered from. Behaviors
// that simulate reasoning read the structured fields; remote models get `text`.
struct Prompt {
    core::Problem problem;
    PromptStyle style = PromptStyle::ZeroShot;
    bool reflection = false;
    std::string own_prev;                // empty for initial prompts
    std::vector<PrevResponse> context;   // sorted by agent id, empty for initial
    std::string text;                    // deterministic rendering of the above
};

class IncompleteContextError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// First ceil(n * cot_fraction) agents (by index) get ChainOfThought, the rest
// ZeroShot. cot_fraction must be in [0,1].
std::vector<PromptStyle> assign_prompt_styles(std::size_t n, double cot_fraction = 0.5);

Prompt build_initial_prompt(const core::Problem& problem, PromptStyle style);

// `all_prev` must contain exactly one response per agent in `expected_agents`
// (own included); anything missing or unexpected throws IncompleteContextError.
// The context is re-sorted by agent id, so input order never affects the bytes.
Prompt build_reflection_prompt(const core::Problem& problem, PromptStyle style,
                               const PrevResponse& own_prev,
                               std::vector<PrevResponse> all_prev,
                               const std::vector<core::AgentId>& expected_agents);

}  // namespace delib::agent
