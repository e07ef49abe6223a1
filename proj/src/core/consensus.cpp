#include "delib/core/consensus.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace delib::core {

namespace {

bool parse_decimal(const std::string& text, bool& negative, std::string& int_part,
                   std::string& frac_part) {
    std::size_t pos = 0;
    negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        negative = text[pos] == '-';
        ++pos;
    }
    int_part.clear();
    frac_part.clear();
    bool seen_dot = false;
    bool any_digit = false;
    for (; pos < text.size(); ++pos) {
        char c = text[pos];
        if (c == '.') {
            if (seen_dot) return false;
            seen_dot = true;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            any_digit = true;
            (seen_dot ? frac_part : int_part) += c;
        } else {
            return false;
        }
    }
    return any_digit;
}

std::string canonical_number(bool negative, std::string int_part, std::string frac_part) {
    while (int_part.size() > 1 && int_part.front() == '0') int_part.erase(int_part.begin());
    if (int_part.empty()) int_part = "0";
    while (!frac_part.empty() && frac_part.back() == '0') frac_part.pop_back();
    bool zero = int_part == "0" && frac_part.empty();
    std::string out;
    if (negative && !zero) out += '-';
    out += int_part;
    if (!frac_part.empty()) {
        out += '.';
        out += frac_part;
    }
    return out;
}

const DefinitiveAction& as_definitive(const Action& action) {
    const auto* def = std::get_if<DefinitiveAction>(&action);
    if (def == nullptr) throw VariantMismatchError();
    return *def;
}

const PrioritizedAction& as_prioritized(const Action& action) {
    const auto* pri = std::get_if<PrioritizedAction>(&action);
    if (pri == nullptr) throw VariantMismatchError();
    return *pri;
}

void require_theta(const Fraction& theta) {
    if (theta <= Fraction(0) || theta > Fraction(1)) {
        throw std::invalid_argument("theta must be in (0,1]");
    }
}

}  // namespace

bool is_abstention(const Action& action) {
    if (const auto* def = std::get_if<DefinitiveAction>(&action)) return def->value.empty();
    return std::get<PrioritizedAction>(action).policies.empty();
}

std::string normalize_value(std::string_view text) {
    std::string collapsed;
    collapsed.reserve(text.size());
    bool pending_space = false;
    for (char raw : text) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isspace(c)) {
            pending_space = !collapsed.empty();
            continue;
        }
        if (pending_space) {
            collapsed += ' ';
            pending_space = false;
        }
        collapsed += static_cast<char>(std::tolower(c));
    }
    if (collapsed.empty()) return std::string(kAbstentionValue);

    bool negative = false;
    std::string int_part;
    std::string frac_part;
    if (parse_decimal(collapsed, negative, int_part, frac_part)) {
        return canonical_number(negative, std::move(int_part), std::move(frac_part));
    }
    return collapsed;
}

ConsensusOutcome check_definitive_unanimity(const std::map<AgentId, Action>& actions) {
    if (actions.empty()) throw std::invalid_argument("empty action map");

    std::map<std::string, std::vector<AgentId>> classes;
    bool any_abstention = false;
    for (const auto& [agent, action] : actions) {
        const auto& def = as_definitive(action);
        if (def.value.empty()) {
            any_abstention = true;
        } else {
            classes[def.value].push_back(agent);
        }
    }

    ConsensusOutcome outcome;
    if (!any_abstention && classes.size() == 1) {
        outcome.status = ConsensusStatus::Unanimous;
        outcome.confidence = Fraction(1);
        outcome.agreeing = classes.begin()->second;
        return outcome;
    }

    outcome.status = ConsensusStatus::NoConsensus;
    outcome.confidence = Fraction(0);
    // largest value class; map order already gives the lexicographically
    // smallest value first on ties
    const std::vector<AgentId>* best = nullptr;
    for (const auto& [value, agents] : classes) {
        if (best == nullptr || agents.size() > best->size()) best = &agents;
    }
    if (best != nullptr) outcome.agreeing = *best;
    return outcome;
}

Fraction agreement_level(const std::string& policy, const std::map<AgentId, Action>& actions) {
    if (actions.empty()) throw std::invalid_argument("empty action map");
    std::int64_t holders = 0;
    for (const auto& [agent, action] : actions) {
        const auto& pri = as_prioritized(action);
        if (std::find(pri.policies.begin(), pri.policies.end(), policy) != pri.policies.end()) {
            ++holders;
        }
    }
    return Fraction(holders, static_cast<std::int64_t>(actions.size()));
}

std::vector<PolicyAgreement> accepted_policies(const std::map<AgentId, Action>& actions,
                                               const Fraction& theta) {
    require_theta(theta);
    if (actions.empty()) throw std::invalid_argument("empty action map");

    std::set<std::string> unique_policies;
    for (const auto& [agent, action] : actions) {
        const auto& pri = as_prioritized(action);
        unique_policies.insert(pri.policies.begin(), pri.policies.end());
    }

    std::vector<PolicyAgreement> accepted;
    for (const auto& policy : unique_policies) {
        Fraction level = agreement_level(policy, actions);
        if (level >= theta) accepted.push_back({policy, level});
    }
    std::sort(accepted.begin(), accepted.end(), [](const PolicyAgreement& a, const PolicyAgreement& b) {
        if (a.level != b.level) return a.level > b.level;
        return a.policy < b.policy;
    });
    return accepted;
}

ConsensusOutcome consensus_confidence(const std::map<AgentId, Action>& actions,
                                      const Fraction& theta) {
    ConsensusOutcome outcome;
    outcome.accepted = accepted_policies(actions, theta);
    if (outcome.accepted.empty()) {
        outcome.status = ConsensusStatus::NoConsensus;
        outcome.confidence = Fraction(0);
        return outcome;
    }

    Fraction sum(0);
    for (const auto& entry : outcome.accepted) sum += entry.level;
    outcome.status = ConsensusStatus::Graded;
    outcome.confidence = sum / Fraction(static_cast<std::int64_t>(outcome.accepted.size()));

    for (const auto& [agent, action] : actions) {
        const auto& pri = as_prioritized(action);
        bool proposed_accepted = std::any_of(
            outcome.accepted.begin(), outcome.accepted.end(), [&](const PolicyAgreement& pa) {
                return std::find(pri.policies.begin(), pri.policies.end(), pa.policy) !=
                       pri.policies.end();
            });
        if (proposed_accepted) outcome.agreeing.push_back(agent);
    }
    return outcome;
}

ConsensusOutcome evaluate_turn(const std::map<AgentId, Action>& actions, ProblemKind kind,
                               const Fraction& theta) {
    std::map<AgentId, Action> responders;
    for (const auto& [agent, action] : actions) {
        if (!is_abstention(action)) responders.emplace(agent, action);
    }
    if (responders.empty()) {
        ConsensusOutcome outcome;
        outcome.status = ConsensusStatus::NoConsensus;
        outcome.confidence = Fraction(0);
        return outcome;
    }
    if (kind == ProblemKind::Definitive) return check_definitive_unanimity(responders);
    return consensus_confidence(responders, theta);
}

bool can_start(const Problem& problem, const HungSet& hung, const std::set<AgentId>& proposed) {
    if (proposed.empty()) throw std::invalid_argument("empty deliberator set");
    const auto* failed_sets = hung.failures(problem.id);
    if (failed_sets == nullptr) return true;
    for (const auto& failed : *failed_sets) {
        if (failed == proposed) return false;
    }
    return true;
}

std::vector<Fraction> compute_payoff(const DeliberationRecord& record) {
    std::vector<Fraction> scores(record.agents.size(), Fraction(0));
    if (!record.outcome.success() || record.actions_by_round.empty()) {
        return scores;
    }

    const auto& final_round = record.actions_by_round.back();
    std::string final_value;
    std::set<std::string> accepted;
    if (record.problem.kind == ProblemKind::Definitive) {
        auto outcome = check_definitive_unanimity(final_round);
        if (!outcome.agreeing.empty()) {
            final_value = as_definitive(final_round.at(outcome.agreeing.front())).value;
        }
    } else {
        for (const auto& pa : accepted_policies(final_round, record.theta)) {
            accepted.insert(pa.policy);
        }
    }

    auto consistent = [&](const Action& action) {
        if (record.problem.kind == ProblemKind::Definitive) {
            const auto* def = std::get_if<DefinitiveAction>(&action);
            return def != nullptr && !final_value.empty() && def->value == final_value;
        }
        const auto* pri = std::get_if<PrioritizedAction>(&action);
        if (pri == nullptr) return false;
        return std::any_of(pri->policies.begin(), pri->policies.end(),
                           [&](const std::string& p) { return accepted.count(p) > 0; });
    };

    auto rounds = static_cast<std::int64_t>(record.actions_by_round.size());
    for (std::size_t i = 0; i < record.agents.size(); ++i) {
        std::int64_t hits = 0;
        for (const auto& round : record.actions_by_round) {
            auto it = round.find(record.agents[i]);
            if (it != round.end() && consistent(it->second)) ++hits;
        }
        scores[i] = Fraction(hits, rounds);
    }
    return scores;
}

void HungSet::record_failure(const std::string& problem_id, std::set<AgentId> deliberators) {
    if (deliberators.empty()) throw std::invalid_argument("empty deliberator set");
    entries_[problem_id].push_back(std::move(deliberators));
}

bool HungSet::contains(const std::string& problem_id) const {
    return entries_.count(problem_id) > 0;
}

const std::vector<std::set<AgentId>>* HungSet::failures(const std::string& problem_id) const {
    auto it = entries_.find(problem_id);
    return it == entries_.end() ? nullptr : &it->second;
}

}  // namespace delib::core
