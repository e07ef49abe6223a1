#include "delib/agent/behavior.hpp"

#include <algorithm>
#include <map>

#include "delib/agent/actions.hpp"
#include "delib/core/rng.hpp"

namespace delib::agent {

ScriptedBehavior::ScriptedBehavior(std::vector<std::string> script)
    : script_(std::move(script)) {
    if (script_.empty()) {
        throw std::invalid_argument("scripted behavior needs at least one entry");
    }
}

std::string ScriptedBehavior::respond(const Prompt&, int turn) {
    return script_.at(static_cast<std::size_t>(turn));
}

StubbornBehavior::StubbornBehavior(core::Action fixed)
    : body_(render_action(fixed)) {}

std::string StubbornBehavior::respond(const Prompt&, int) {
    return body_;
}

ConvergentBehavior::ConvergentBehavior(core::Action initial, double p_adopt, std::uint64_t seed)
    : initial_(std::move(initial)), p_adopt_(p_adopt), rng_(seed) {
    if (p_adopt_ < 0.0 || p_adopt_ > 1.0) {
        throw std::invalid_argument("p_adopt must be in [0,1]");
    }
}

namespace {

// Strict majority value among non-abstaining definitive context actions;
// empty when none clears half of the full context size.
std::string majority_value(const std::vector<core::Action>& context) {
    std::map<std::string, std::size_t> counts;
    for (const auto& action : context) {
        const auto& definitive = std::get<core::DefinitiveAction>(action);
        if (!definitive.value.empty()) ++counts[definitive.value];
    }
    for (const auto& [value, count] : counts) {
        if (count * 2 > context.size()) return value;
    }
    return "";
}

// Policies individually supported by a strict majority of the context.
std::vector<std::string> majority_policies(const std::vector<core::Action>& context) {
    std::map<std::string, std::size_t> counts;
    for (const auto& action : context) {
        const auto& prioritized = std::get<core::PrioritizedAction>(action);
        for (const auto& policy : prioritized.policies) ++counts[policy];
    }
    std::vector<std::string> majority;
    for (const auto& [policy, count] : counts) {
        if (count * 2 > context.size()) majority.push_back(policy);
    }
    return majority;
}

}  // namespace

std::string ConvergentBehavior::respond(const Prompt& prompt, int) {
    if (!prompt.reflection) {
        return render_action(initial_);
    }

    auto kind = prompt.problem.kind;
    auto own = extract_action(prompt.own_prev, kind);
    std::vector<core::Action> context;
    context.reserve(prompt.context.size());
    for (const auto& response : prompt.context) {
        context.push_back(extract_action(response.body, kind));
    }

    // One draw per turn regardless of outcome, so the stream stays aligned
    // across scenarios that differ only in context content.
    bool adopt = core::uniform01(rng_) < p_adopt_;

    if (kind == core::ProblemKind::Definitive) {
        auto majority = majority_value(context);
        auto self = std::get<core::DefinitiveAction>(own);
        if (adopt && !majority.empty() && majority != self.value) {
            self.value = majority;
            self.argument = "The majority answer is more convincing.";
        }
        return render_action(core::Action{self});
    }

    auto majority = majority_policies(context);
    auto self = std::get<core::PrioritizedAction>(own);
    if (adopt && !majority.empty() && majority != self.policies) {
        self.policies = majority;
    }
    return render_action(core::Action{self});
}

std::string UnavailableBehavior::respond(const Prompt&, int) {
    throw AgentUnavailableError("agent is unreachable");
}

}  // namespace delib::agent
