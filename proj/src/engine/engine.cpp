#include "delib/engine/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <variant>

#include "delib/agent/actions.hpp"
#include "delib/core/consensus.hpp"
#include "delib/core/rng.hpp"
#include "delib/net/gossip.hpp"

namespace delib::engine {

core::Fraction consensus_accuracy(const std::map<core::AgentId, core::Action>& actions,
                                  const std::optional<std::string>& ground_truth) {
    if (!ground_truth.has_value()) throw AccuracyUnavailableError{};
    if (actions.empty()) throw std::invalid_argument("accuracy needs a non-empty action map");
    const std::string truth = core::normalize_value(*ground_truth);
    std::int64_t correct = 0;
    for (const auto& [agent, action] : actions) {
        const auto* definitive = std::get_if<core::DefinitiveAction>(&action);
        if (definitive && !definitive->value.empty() && definitive->value == truth) ++correct;
    }
    return core::Fraction(correct, static_cast<std::int64_t>(actions.size()));
}

Session::Session(std::uint64_t seed, std::size_t node_count) : seed_(seed) {
    if (node_count == 0) throw std::invalid_argument("session needs at least one node");
    chains_.reserve(node_count);
    for (std::size_t i = 0; i < node_count; ++i) chains_.emplace_back(&directory_);
}

void Session::register_tags(const std::vector<std::uint64_t>& tags) {
    for (auto tag : tags) {
        auto identity = net::derive_identity(seed_, tag);
        directory_.add(identity.id, identity.public_key);
    }
}

namespace {

core::Action abstention_for(core::ProblemKind kind) {
    if (kind == core::ProblemKind::Definitive) return core::Action{core::DefinitiveAction{}};
    return core::Action{core::PrioritizedAction{}};
}

// One turn as seen from a single node's store: every expected agent mapped
// to an extracted action, absentees and empty bodies filled as abstentions.
// An empty body means the agent produced nothing (unavailable or lost in
// transit); a marker-free non-empty body is an abstaining participant.
struct TurnView {
    std::map<core::AgentId, core::Action> actions;
    std::size_t participants = 0;
};

TurnView view_turn(const net::Node& node, const std::string& deliberation_id, net::Round round,
                   std::uint32_t turn, const std::vector<core::AgentId>& agent_ids,
                   core::ProblemKind kind) {
    TurnView view;
    std::map<core::AgentId, const std::string*> bodies;
    for (const auto* utterance : node.turn_utterances(deliberation_id, round, turn)) {
        bodies[utterance->agent.hex()] = &utterance->body;
    }
    for (const auto& id : agent_ids) {
        auto it = bodies.find(id);
        if (it != bodies.end() && !it->second->empty()) {
            ++view.participants;
            view.actions.emplace(id, agent::extract_action(*it->second, kind));
        } else {
            view.actions.emplace(id, abstention_for(kind));
        }
    }
    return view;
}

net::Round round_of(std::uint32_t turn) {
    return turn == 0 ? net::Round::Initial : net::Round::Reflection;
}

}  // namespace

RunResult run_deliberation(Session& session, DeliberationConfig config,
                           const core::Problem& problem) {
    const std::size_t n = config.agents.size();
    if (n == 0) throw std::invalid_argument("deliberation needs at least one agent");
    if (n != session.node_count()) {
        throw std::invalid_argument("agent count does not match the session's node count");
    }
    if (config.max_turns < 1) throw std::invalid_argument("at least one reflection turn required");
    if (config.theta <= core::Fraction(0) || config.theta > core::Fraction(1)) {
        throw std::invalid_argument("theta must be in (0,1]");
    }
    if (config.pgt_bytes_per_unit == 0) throw std::invalid_argument("pgt unit must be positive");
    const std::size_t min_participants =
        config.min_participants == 0 ? n : config.min_participants;
    if (min_participants > n) throw std::invalid_argument("min_participants exceeds agent count");

    std::vector<std::uint64_t> tags;
    tags.reserve(n);
    for (const auto& spec : config.agents) {
        if (!spec.behavior) throw std::invalid_argument("every agent needs a behavior");
        tags.push_back(spec.identity_tag);
    }
    if (std::set<std::uint64_t>(tags.begin(), tags.end()).size() != n) {
        throw std::invalid_argument("identity tags must be unique");
    }
    session.register_tags(tags);

    net::TransportConfig transport_config = config.transport;
    transport_config.seed = core::derive_seed(config.seed, "transport");
    net::Network network(session.seed(), tags, transport_config, config.gossip);
    net::SimTransport& transport = network.transport();

    const std::string deliberation_id =
        config.deliberation_id.empty() ? problem.id + "#0" : config.deliberation_id;

    // Speaking order is ascending node id; the proposer leads it.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return network.node(a).identity().id < network.node(b).identity().id;
    });
    const std::size_t proposer = network.proposer_index();
    std::vector<core::AgentId> agent_ids;
    agent_ids.reserve(n);
    for (auto i : order) agent_ids.push_back(network.node(i).identity().id.hex());

    RunResult result;
    result.metrics.deliberation_id = deliberation_id;
    result.metrics.agent_count = n;
    result.metrics.turns_configured = config.max_turns;

    const std::set<core::AgentId> roster(agent_ids.begin(), agent_ids.end());
    if (!core::can_start(problem, session.hung(), roster)) {
        result.status = RunStatus::Refused;
        return result;
    }

    // Default deadline: 50 turns' worth of the gossip quiescence bound
    // (announce, request, data, re-announce hops plus one retry window).
    const double per_turn_bound =
        4.0 * transport_config.latency_max + config.gossip.request_retry_delay;
    const double timeout = config.timeout > 0 ? config.timeout : 50.0 * per_turn_bound;

    double prompt_time = 0.0;
    auto respond = [&](std::size_t i, const agent::Prompt& prompt, std::uint32_t turn) {
        double cost = std::ceil(static_cast<double>(prompt.text.size()) /
                                static_cast<double>(config.pgt_bytes_per_unit));
        transport.advance(cost);
        prompt_time += cost;
        try {
            return config.agents[i].behavior->respond(prompt, static_cast<int>(turn));
        } catch (const agent::AgentUnavailableError&) {
            return std::string{};  // silent turn; counts against participation
        }
    };
    auto publish = [&](std::size_t i, std::uint32_t turn, std::string body) {
        net::Utterance utterance{deliberation_id, round_of(turn), turn,
                                 network.node(i).identity().id, std::move(body)};
        utterance = net::sign_utterance(network.node(i).identity(), std::move(utterance));
        utterance.action = agent::extract_action(utterance.body, problem.kind);
        network.node(i).publish(transport, utterance);
    };

    for (auto i : order) {
        auto prompt = agent::build_initial_prompt(problem, config.agents[i].style);
        publish(i, 0, respond(i, prompt, 0));
    }
    transport.run_until_quiescent();
    const double initial_done = transport.now();

    core::Outcome outcome{core::OutcomeKind::Hung, core::HungReason::Exhausted};
    core::Fraction participation_min{1};
    std::uint32_t turns_executed = 0;
    bool decided = false;

    // Records the proposer's view of one evaluated turn; false when too few
    // agents responded.
    auto note_turn = [&](const TurnView& view) {
        result.turn_actions.push_back(view.actions);
        participation_min = std::min(
            participation_min,
            core::Fraction(static_cast<std::int64_t>(view.participants),
                           static_cast<std::int64_t>(n)));
        if (problem.ground_truth.has_value()) {
            result.metrics.per_turn_accuracy.push_back(
                consensus_accuracy(view.actions, problem.ground_truth));
        }
        return view.participants >= min_participants;
    };

    const net::Node& proposer_node = network.node(proposer);
    if (!note_turn(view_turn(proposer_node, deliberation_id, net::Round::Initial, 0, agent_ids,
                             problem.kind))) {
        outcome = {core::OutcomeKind::Hung, core::HungReason::Participation};
        decided = true;
    }

    for (std::uint32_t t = 1; !decided && t <= config.max_turns; ++t) {
        if (transport.now() >= timeout) {
            outcome = {core::OutcomeKind::Hung, core::HungReason::Timeout};
            decided = true;
            break;
        }
        for (auto i : order) {
            const net::Node& node = network.node(i);
            const core::AgentId own_id = node.identity().id.hex();
            // Context comes from this node's own store; peers it never heard
            // from appear as empty bodies so the prompt stays well formed.
            std::map<core::AgentId, const std::string*> bodies;
            for (const auto* u : node.turn_utterances(deliberation_id, round_of(t - 1), t - 1)) {
                bodies[u->agent.hex()] = &u->body;
            }
            std::vector<agent::PrevResponse> context;
            context.reserve(n);
            for (const auto& id : agent_ids) {
                auto it = bodies.find(id);
                context.push_back({id, it == bodies.end() ? std::string{} : *it->second});
            }
            agent::PrevResponse own{own_id, *bodies.at(own_id)};
            auto prompt = agent::build_reflection_prompt(problem, config.agents[i].style, own,
                                                         context, agent_ids);
            publish(i, t, respond(i, prompt, t));
        }
        transport.run_until_quiescent();
        ++turns_executed;

        TurnView view =
            view_turn(proposer_node, deliberation_id, net::Round::Reflection, t, agent_ids,
                      problem.kind);
        if (!note_turn(view)) {
            outcome = {core::OutcomeKind::Hung, core::HungReason::Participation};
            decided = true;
            break;
        }
        auto consensus = core::evaluate_turn(view.actions, problem.kind, config.theta);
        bool reached;
        if (problem.kind == core::ProblemKind::Definitive) {
            reached = consensus.status == core::ConsensusStatus::Unanimous;
        } else {
            // Graded consensus ends the run early only at full confidence;
            // otherwise the last turn takes whatever cleared the threshold.
            reached = consensus.status == core::ConsensusStatus::Graded &&
                      (t == config.max_turns || consensus.confidence == core::Fraction(1));
        }
        if (reached && transport.now() < timeout) {
            outcome = {core::OutcomeKind::Success, core::HungReason::None};
            decided = true;
            break;
        }
        if (transport.now() >= timeout) {
            outcome = {core::OutcomeKind::Hung, core::HungReason::Timeout};
            decided = true;
            break;
        }
    }
    const double reflection_done = transport.now();

    core::DeliberationRecord base;
    base.problem = problem;
    base.agents = agent_ids;
    base.theta = config.theta;
    base.completed_at = static_cast<std::uint64_t>(std::llround(transport.now() * 1000.0));
    const std::uint64_t timestamp = base.completed_at;

    // Every node assembles the record from its own store. A node whose view
    // cannot confirm the success the proposer saw records an honest hung
    // block instead; the mismatch counter below surfaces the divergence.
    auto build_for_node = [&](std::size_t node_index, const core::Outcome& global) {
        const net::Node& node = network.node(node_index);
        const ledger::Block* prev = session.chain(node_index).tip();
        core::DeliberationRecord record = base;
        record.outcome = global;
        if (global.success()) {
            record.actions_by_round.push_back(
                view_turn(node, deliberation_id, net::Round::Initial, 0, agent_ids, problem.kind)
                    .actions);
            for (std::uint32_t t = 1; t <= turns_executed; ++t) {
                record.actions_by_round.push_back(
                    view_turn(node, deliberation_id, net::Round::Reflection, t, agent_ids,
                              problem.kind)
                        .actions);
            }
            auto check =
                core::evaluate_turn(record.actions_by_round.back(), problem.kind, config.theta);
            bool confirmed = problem.kind == core::ProblemKind::Definitive
                                 ? check.status == core::ConsensusStatus::Unanimous
                                 : check.status == core::ConsensusStatus::Graded;
            if (confirmed) {
                record.confidence = check.confidence;
                record.payoff = core::compute_payoff(record);
                std::vector<net::Utterance> transcript;
                for (const auto* u : node.transcript(deliberation_id)) transcript.push_back(*u);
                try {
                    return ledger::build_block(record, std::move(transcript), prev, timestamp,
                                               session.directory());
                } catch (const ledger::OversizeBlockError&) {
                    record.outcome = {core::OutcomeKind::Hung, core::HungReason::Oversize};
                }
            } else {
                record.outcome = {core::OutcomeKind::Hung, core::HungReason::Exhausted};
            }
            record.confidence = core::Fraction(0);
        }
        record.actions_by_round.clear();
        record.payoff = core::compute_payoff(record);
        return ledger::build_empty_block(std::move(record), prev, timestamp);
    };

    // The proposer settles the global outcome first: if its own success
    // block cannot fit the cap, the whole run concludes Hung{Oversize} and
    // every node writes the same empty block.
    ledger::Block proposer_block = build_for_node(proposer, outcome);
    if (outcome.success() && !proposer_block.record.outcome.success()) {
        outcome = proposer_block.record.outcome;
    }

    std::vector<net::Bytes> block_bytes(n);
    std::size_t mismatches = 0;
    for (std::size_t j = 0; j < n; ++j) {
        ledger::Block block = j == proposer ? proposer_block : build_for_node(j, outcome);
        block_bytes[j] = ledger::canonical_serialize(block);
        auto verdict = session.chain(j).verify_and_append(std::move(block));
        if (!verdict.ok) {
            throw std::runtime_error("locally built block failed verification: " +
                                     verdict.detail);
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (j == proposer) continue;
        network.node(j).set_block_sink(
            [&mismatches, &block_bytes, j](const net::Digest&, const net::Bytes& received) {
                if (received != block_bytes[j]) ++mismatches;
            });
    }
    network.node(proposer).publish_block(transport, block_bytes[proposer]);
    transport.run_until_quiescent();

    if (!outcome.success()) session.hung().record_failure(problem.id, roster);

    result.status = RunStatus::Completed;
    result.record = proposer_block.record;
    result.proposer_block = std::move(proposer_block);
    result.metrics.turns_executed = turns_executed;
    result.metrics.initial_round_latency = initial_done;
    result.metrics.reflection_latency = reflection_done - initial_done;
    result.metrics.prompt_generation_time = prompt_time;
    result.metrics.total_latency = reflection_done;
    result.metrics.block_size = block_bytes[proposer].size();
    result.metrics.participation = participation_min;
    result.metrics.confidence = outcome.success() ? result.record.confidence : core::Fraction(0);
    result.metrics.outcome = outcome;
    result.metrics.block_mismatches = mismatches;
    return result;
}

}  // namespace delib::engine
