#pragma once

#include "delib/core/types.hpp"

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace delib::core {

// Canonical form of a free-text answer: trimmed, case-folded, internal
// whitespace collapsed; numeric answers reduced to a canonical decimal
// ("42.0" -> "42"). Returns "" for inputs that normalize to nothing, which
// callers treat as an abstention.
std::string normalize_value(std::string_view text);

inline constexpr const char* kAbstentionValue = "";

// Unanimity over a map of definitive actions: Unanimous with confidence 1
// iff every agent's value is identical and non-abstaining. Otherwise
// NoConsensus with `agreeing` set to the largest value class (ties broken by
// lexicographically smallest value). Throws VariantMismatchError if any
// action is not Definitive, std::invalid_argument on an empty map.
ConsensusOutcome check_definitive_unanimity(const std::map<AgentId, Action>& actions);

// Fraction of agents whose policy set contains `policy`. Throws
// VariantMismatchError on non-prioritized actions, std::invalid_argument on
// an empty map.
Fraction agreement_level(const std::string& policy, const std::map<AgentId, Action>& actions);

// Every unique policy whose agreement level reaches `theta`, paired with its
// level, ordered by descending level then lexicographic policy. theta must
// be in (0,1].
std::vector<PolicyAgreement> accepted_policies(const std::map<AgentId, Action>& actions,
                                               const Fraction& theta);

// Graded consensus: confidence is the mean agreement level over accepted
// policies; an empty accepted set yields NoConsensus with confidence 0.
// `agreeing` lists agents that proposed at least one accepted policy.
ConsensusOutcome consensus_confidence(const std::map<AgentId, Action>& actions,
                                      const Fraction& theta);

// The consensus rule applied to one recorded turn, shared by the engine's
// per-turn evaluation and by chain verification so the two can never drift:
// abstentions are dropped first (they do not veto), then definitive maps go
// through the unanimity check and prioritized maps through the graded check
// with `theta`. A map with no remaining responders is NoConsensus.
ConsensusOutcome evaluate_turn(const std::map<AgentId, Action>& actions, ProblemKind kind,
                               const Fraction& theta);

// Start gate: a problem may be deliberated if it never hung before, or if
// the proposed deliberator set differs from every set that previously failed
// on it. `proposed` must be non-empty.
bool can_start(const Problem& problem, const HungSet& hung, const std::set<AgentId>& proposed);

// Placeholder contribution score: the fraction of evaluated rounds in which
// the agent's action is consistent with the final outcome (matching the
// unanimous value, or proposing at least one accepted policy). Hung records
// score zero for everyone. The scheme is a stand-in; nothing downstream
// depends on its exact shape.
std::vector<Fraction> compute_payoff(const DeliberationRecord& record);

}  // namespace delib::core
