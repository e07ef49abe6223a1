#pragma once

#include "delib/core/fraction.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace delib::core {

using AgentId = std::string;

enum class ProblemKind : std::uint8_t { Definitive = 0, Prioritized = 1 };

// The subject of a deliberation. ground_truth is used by metrics only and
// never influences the protocol itself.
struct Problem {
    std::string id;
    std::string statement;
    ProblemKind kind = ProblemKind::Definitive;
    std::optional<std::string> ground_truth;

    bool operator==(const Problem&) const = default;
};

// A value-argument pair. An empty (post-normalization) value is an
// abstention, not an error.
struct DefinitiveAction {
    std::string value;     // canonical form, "" = abstention
    std::string argument;  // free-text supporting reasoning

    bool operator==(const DefinitiveAction&) const = default;
};

// An ordered, deduplicated set of canonical policy strings. Empty set is an
// abstention.
struct PrioritizedAction {
    std::vector<std::string> policies;

    bool operator==(const PrioritizedAction&) const = default;
};

using Action = std::variant<DefinitiveAction, PrioritizedAction>;

bool is_abstention(const Action& action);

enum class ConsensusStatus : std::uint8_t { Unanimous, Graded, NoConsensus };

struct PolicyAgreement {
    std::string policy;
    Fraction level;

    bool operator==(const PolicyAgreement&) const = default;
};

struct ConsensusOutcome {
    ConsensusStatus status = ConsensusStatus::NoConsensus;
    Fraction confidence{0};
    std::vector<PolicyAgreement> accepted;  // populated for graded outcomes
    std::vector<AgentId> agreeing;          // sorted agent ids

    bool operator==(const ConsensusOutcome&) const = default;
};

enum class OutcomeKind : std::uint8_t { Success = 0, Hung = 1 };

enum class HungReason : std::uint8_t {
    None = 0,           // Success outcomes
    Timeout = 1,        // logical deadline exceeded
    Exhausted = 2,      // all reflection turns spent without consensus
    Participation = 3,  // responders fell below the configured threshold
    Oversize = 4,       // transcript would not fit the block cap
};

struct Outcome {
    OutcomeKind kind = OutcomeKind::Success;
    HungReason reason = HungReason::None;

    bool success() const { return kind == OutcomeKind::Success; }
    bool operator==(const Outcome&) const = default;
};

// One completed deliberation: problem, participants in speaking order, every
// evaluated round's actions, payoffs aligned with `agents`, the achieved
// confidence, and the logical completion time. Hung records keep the
// parameters but drop the per-round actions so an empty block always fits
// the size cap.
struct DeliberationRecord {
    Problem problem;
    std::vector<AgentId> agents;
    std::vector<std::map<AgentId, Action>> actions_by_round;
    std::vector<Fraction> payoff;
    Fraction confidence{0};
    Fraction theta{1, 2};
    std::uint64_t completed_at = 0;
    Outcome outcome;

    bool operator==(const DeliberationRecord&) const = default;
};

// Problems whose deliberations stalled, together with every deliberator set
// that failed on them. Guards restarts: the same set may not retry the same
// problem.
class HungSet {
public:
    void record_failure(const std::string& problem_id, std::set<AgentId> deliberators);
    bool contains(const std::string& problem_id) const;
    const std::vector<std::set<AgentId>>* failures(const std::string& problem_id) const;
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, std::vector<std::set<AgentId>>> entries_;
};

struct VariantMismatchError : std::invalid_argument {
    VariantMismatchError() : std::invalid_argument("mixed action variants in consensus check") {}
};

}  // namespace delib::core
