#include "delib/agent/actions.hpp"

#include <algorithm>
#include <set>
#include <vector>

#include "delib/core/consensus.hpp"

namespace delib::agent {

namespace {

constexpr std::string_view kAnswerMarker = "ANSWER:";
constexpr std::string_view kPolicyMarker = "POLICY:";

std::string trim(std::string_view text) {
    auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return "";
    auto end = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(begin, end - begin + 1));
}

core::Action extract_definitive(std::string_view text) {
    auto marker = text.rfind(kAnswerMarker);
    if (marker == std::string_view::npos) {
        return core::DefinitiveAction{};
    }
    auto value_begin = marker + kAnswerMarker.size();
    auto line_end = text.find('\n', value_begin);
    auto raw_value = text.substr(value_begin, line_end == std::string_view::npos
                                                  ? std::string_view::npos
                                                  : line_end - value_begin);
    core::DefinitiveAction action;
    action.value = core::normalize_value(raw_value);
    action.argument = trim(text.substr(0, marker));
    return action;
}

core::Action extract_prioritized(std::string_view text) {
    core::PrioritizedAction action;
    std::set<std::string> seen;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto line_end = text.find('\n', pos);
        auto line = text.substr(pos, line_end == std::string_view::npos ? std::string_view::npos
                                                                        : line_end - pos);
        if (line.starts_with(kPolicyMarker)) {
            auto policy = core::normalize_value(line.substr(kPolicyMarker.size()));
            if (!policy.empty() && seen.insert(policy).second) {
                action.policies.push_back(std::move(policy));
            }
        }
        if (line_end == std::string_view::npos) break;
        pos = line_end + 1;
    }
    return action;
}

}  // namespace

std::string render_action(const core::Action& action) {
    if (core::is_abstention(action)) {
        return "I am unsure.";
    }
    if (const auto* definitive = std::get_if<core::DefinitiveAction>(&action)) {
        std::string text;
        if (!definitive->argument.empty()) {
            text += definitive->argument + "\n";
        }
        text += std::string(kAnswerMarker) + " " + definitive->value;
        return text;
    }
    const auto& prioritized = std::get<core::PrioritizedAction>(action);
    std::string text;
    for (std::size_t i = 0; i < prioritized.policies.size(); ++i) {
        if (i > 0) text += "\n";
        text += std::string(kPolicyMarker) + " " + prioritized.policies[i];
    }
    return text;
}

core::Action extract_action(std::string_view text, core::ProblemKind kind) {
    return kind == core::ProblemKind::Definitive ? extract_definitive(text)
                                                 : extract_prioritized(text);
}

}  // namespace delib::agent
