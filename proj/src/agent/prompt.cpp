#include "delib/agent/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace delib::agent {

namespace {

const char* style_directive(PromptStyle style) {
    return style == PromptStyle::ChainOfThought
               ? "Think step by step before answering.\n\n"
               : "";
}

std::string format_footer(core::ProblemKind kind) {
    if (kind == core::ProblemKind::Definitive) {
        return "Finish with a line of the form \"ANSWER: <your value>\".\n";
    }
    return "List every policy you support, one per line, as \"POLICY: <policy>\".\n";
}

std::string problem_header(const core::Problem& problem) {
    return "Problem " + problem.id + ":\n" + problem.statement + "\n\n";
}

}  // namespace

std::vector<PromptStyle> assign_prompt_styles(std::size_t n, double cot_fraction) {
    if (cot_fraction < 0.0 || cot_fraction > 1.0) {
        throw std::invalid_argument("cot_fraction must be in [0,1]");
    }
    auto cot = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * cot_fraction));
    cot = std::min(cot, n);
    std::vector<PromptStyle> styles(n, PromptStyle::ZeroShot);
    std::fill_n(styles.begin(), cot, PromptStyle::ChainOfThought);
    return styles;
}

Prompt build_initial_prompt(const core::Problem& problem, PromptStyle style) {
    Prompt prompt;
    prompt.problem = problem;
    prompt.style = style;
    prompt.reflection = false;
    prompt.text = problem_header(problem) + style_directive(style) + format_footer(problem.kind);
    return prompt;
}

Prompt build_reflection_prompt(const core::Problem& problem, PromptStyle style,
                               const PrevResponse& own_prev,
                               std::vector<PrevResponse> all_prev,
                               const std::vector<core::AgentId>& expected_agents) {
    std::set<core::AgentId> expected(expected_agents.begin(), expected_agents.end());
    std::set<core::AgentId> seen;
    for (const auto& response : all_prev) {
        if (!expected.count(response.agent)) {
            throw IncompleteContextError("unexpected agent in context: " + response.agent);
        }
        if (!seen.insert(response.agent).second) {
            throw IncompleteContextError("duplicate agent in context: " + response.agent);
        }
    }
    if (seen.size() != expected.size()) {
        throw IncompleteContextError("context is missing agent responses");
    }

    std::sort(all_prev.begin(), all_prev.end(),
              [](const PrevResponse& a, const PrevResponse& b) { return a.agent < b.agent; });

    Prompt prompt;
    prompt.problem = problem;
    prompt.style = style;
    prompt.reflection = true;
    prompt.own_prev = own_prev.body;
    prompt.context = all_prev;

    std::string text = problem_header(problem);
    text += "Your previous response:\n" + own_prev.body + "\n\n";
    text += "All responses from the previous turn:\n";
    for (const auto& response : prompt.context) {
        text += "[agent " + response.agent + "]\n" + response.body + "\n";
    }
    text += "\nEvaluate the responses above, reconsider your reasoning, and improve your answer if warranted.\n\n";
    text += style_directive(style);
    text += format_footer(problem.kind);
    prompt.text = std::move(text);
    return prompt;
}

}  // namespace delib::agent
