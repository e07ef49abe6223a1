#include "delib/ledger/block.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace delib::ledger {

namespace {

void put_fraction(net::Bytes& out, const core::Fraction& fraction) {
    if (fraction.numerator() < 0 || fraction.denominator() <= 0) {
        throw std::invalid_argument("chain fractions must be non-negative");
    }
    net::put_u64(out, static_cast<std::uint64_t>(fraction.numerator()));
    net::put_u64(out, static_cast<std::uint64_t>(fraction.denominator()));
}

core::Fraction read_fraction(net::Reader& reader) {
    auto numerator = reader.u64();
    auto denominator = reader.u64();
    constexpr auto max = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
    if (denominator == 0 || numerator > max || denominator > max) {
        throw net::CodecError("malformed fraction");
    }
    return {static_cast<std::int64_t>(numerator), static_cast<std::int64_t>(denominator)};
}

void put_action(net::Bytes& out, const core::Action& action) {
    if (const auto* definitive = std::get_if<core::DefinitiveAction>(&action)) {
        net::put_u8(out, 0);
        net::put_var(out, definitive->value);
        net::put_var(out, definitive->argument);
        return;
    }
    const auto& prioritized = std::get<core::PrioritizedAction>(action);
    net::put_u8(out, 1);
    net::put_u32(out, static_cast<std::uint32_t>(prioritized.policies.size()));
    for (const auto& policy : prioritized.policies) net::put_var(out, policy);
}

core::Action read_action(net::Reader& reader) {
    auto tag = reader.u8();
    if (tag == 0) {
        core::DefinitiveAction action;
        action.value = reader.var_string();
        action.argument = reader.var_string();
        return action;
    }
    if (tag != 1) throw net::CodecError("unknown action tag");
    core::PrioritizedAction action;
    auto count = reader.u32();
    if (count > 1u << 16) throw net::CodecError("policy list too long");
    action.policies.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) action.policies.push_back(reader.var_string());
    return action;
}

void put_record(net::Bytes& out, const core::DeliberationRecord& record) {
    net::put_var(out, record.problem.id);
    net::put_var(out, record.problem.statement);
    net::put_u8(out, static_cast<std::uint8_t>(record.problem.kind));
    net::put_u8(out, record.problem.ground_truth ? 1 : 0);
    if (record.problem.ground_truth) net::put_var(out, *record.problem.ground_truth);

    net::put_u32(out, static_cast<std::uint32_t>(record.agents.size()));
    for (const auto& agent : record.agents) net::put_var(out, agent);

    net::put_u32(out, static_cast<std::uint32_t>(record.actions_by_round.size()));
    for (const auto& round : record.actions_by_round) {
        net::put_u32(out, static_cast<std::uint32_t>(round.size()));
        for (const auto& [agent, action] : round) {
            net::put_var(out, agent);
            put_action(out, action);
        }
    }

    net::put_u32(out, static_cast<std::uint32_t>(record.payoff.size()));
    for (const auto& payoff : record.payoff) put_fraction(out, payoff);
    put_fraction(out, record.confidence);
    put_fraction(out, record.theta);
    net::put_u64(out, record.completed_at);
    net::put_u8(out, static_cast<std::uint8_t>(record.outcome.kind));
    net::put_u8(out, static_cast<std::uint8_t>(record.outcome.reason));
}

core::DeliberationRecord read_record(net::Reader& reader) {
    core::DeliberationRecord record;
    record.problem.id = reader.var_string();
    record.problem.statement = reader.var_string();
    auto kind = reader.u8();
    if (kind > 1) throw net::CodecError("unknown problem kind");
    record.problem.kind = static_cast<core::ProblemKind>(kind);
    if (reader.u8() == 1) record.problem.ground_truth = reader.var_string();

    auto agent_count = reader.u32();
    if (agent_count > 1u << 16) throw net::CodecError("agent list too long");
    record.agents.reserve(agent_count);
    for (std::uint32_t i = 0; i < agent_count; ++i) record.agents.push_back(reader.var_string());

    auto round_count = reader.u32();
    if (round_count > 1u << 16) throw net::CodecError("round list too long");
    record.actions_by_round.resize(round_count);
    for (auto& round : record.actions_by_round) {
        auto entries = reader.u32();
        if (entries > 1u << 16) throw net::CodecError("round map too long");
        for (std::uint32_t i = 0; i < entries; ++i) {
            auto agent = reader.var_string();
            auto action = read_action(reader);
            if (!round.emplace(std::move(agent), std::move(action)).second) {
                throw net::CodecError("duplicate agent in round actions");
            }
        }
    }

    auto payoff_count = reader.u32();
    if (payoff_count > 1u << 16) throw net::CodecError("payoff list too long");
    record.payoff.reserve(payoff_count);
    for (std::uint32_t i = 0; i < payoff_count; ++i) record.payoff.push_back(read_fraction(reader));
    record.confidence = read_fraction(reader);
    record.theta = read_fraction(reader);
    record.completed_at = reader.u64();
    auto outcome_kind = reader.u8();
    auto outcome_reason = reader.u8();
    if (outcome_kind > 1 || outcome_reason > static_cast<std::uint8_t>(core::HungReason::Oversize)) {
        throw net::CodecError("unknown outcome encoding");
    }
    record.outcome.kind = static_cast<core::OutcomeKind>(outcome_kind);
    record.outcome.reason = static_cast<core::HungReason>(outcome_reason);
    return record;
}

bool transcript_sorted(const std::vector<net::Utterance>& transcript) {
    auto key = [](const net::Utterance& u) { return std::tuple(u.round, u.turn, u.agent); };
    for (std::size_t i = 1; i < transcript.size(); ++i) {
        if (!(key(transcript[i - 1]) < key(transcript[i]))) return false;
    }
    return true;
}

}  // namespace

net::Bytes encode_body(const core::DeliberationRecord& record,
                       const std::vector<net::Utterance>& transcript) {
    net::Bytes out;
    put_record(out, record);
    net::put_u32(out, static_cast<std::uint32_t>(transcript.size()));
    for (const auto& utterance : transcript) {
        auto wire = utterance.wire_bytes();
        net::put_var(out, std::span<const std::uint8_t>(wire));
    }
    return out;
}

net::Digest body_digest(const core::DeliberationRecord& record,
                        const std::vector<net::Utterance>& transcript) {
    auto body = encode_body(record, transcript);
    return net::sha256(body);
}

net::Bytes canonical_serialize(const Block& block) {
    net::Bytes out;
    net::put_u64(out, block.header.height);
    net::put_raw(out, block.header.previous);
    net::put_u64(out, block.header.timestamp);
    net::put_u8(out, static_cast<std::uint8_t>(block.header.outcome));
    net::put_raw(out, block.header.body_digest);
    auto body = encode_body(block.record, block.transcript);
    net::put_var(out, std::span<const std::uint8_t>(body));
    if (out.size() > kBlockSizeCap) {
        throw OversizeBlockError("canonical block is " + std::to_string(out.size()) +
                                 " bytes; the cap is " + std::to_string(kBlockSizeCap));
    }
    return out;
}

Block deserialize_block(std::span<const std::uint8_t> data) {
    if (data.size() > kBlockSizeCap) throw OversizeBlockError("block bytes exceed the cap");
    net::Reader reader(data);
    Block block;
    block.header.height = reader.u64();
    auto previous = reader.raw(block.header.previous.size());
    std::copy(previous.begin(), previous.end(), block.header.previous.begin());
    block.header.timestamp = reader.u64();
    auto outcome = reader.u8();
    if (outcome > 1) throw net::CodecError("unknown outcome tag");
    block.header.outcome = static_cast<OutcomeTag>(outcome);
    auto digest = reader.raw(block.header.body_digest.size());
    std::copy(digest.begin(), digest.end(), block.header.body_digest.begin());

    auto body = reader.var_bytes();
    reader.expect_done();
    net::Reader body_reader(body);
    block.record = read_record(body_reader);
    auto utterance_count = body_reader.u32();
    if (utterance_count > 1u << 16) throw net::CodecError("transcript too long");
    block.transcript.reserve(utterance_count);
    for (std::uint32_t i = 0; i < utterance_count; ++i) {
        block.transcript.push_back(net::Utterance::from_wire(body_reader.var_bytes()));
    }
    body_reader.expect_done();
    return block;
}

net::Digest block_digest(const Block& block) {
    auto bytes = canonical_serialize(block);
    return net::sha256(bytes);
}

Block build_block(const core::DeliberationRecord& record, std::vector<net::Utterance> transcript,
                  const Block* prev, std::uint64_t timestamp, const net::Directory& directory) {
    if (!record.outcome.success()) {
        throw WrongOutcomeError("build_block requires a Success record");
    }
    if (!transcript_sorted(transcript)) {
        throw std::invalid_argument("transcript must be sorted by round, turn, agent");
    }
    for (const auto& utterance : transcript) {
        const auto* key = directory.find(utterance.agent);
        if (!key || !verify_utterance(utterance, *key)) {
            throw std::invalid_argument("transcript contains an unverifiable utterance");
        }
    }

    Block block;
    block.header.height = prev ? prev->header.height + 1 : 1;
    if (prev) block.header.previous = block_digest(*prev);
    block.header.timestamp = timestamp;
    block.header.outcome = OutcomeTag::Success;
    block.record = record;
    block.transcript = std::move(transcript);
    block.header.body_digest = body_digest(block.record, block.transcript);
    canonical_serialize(block);  // enforces the size cap
    return block;
}

Block build_empty_block(core::DeliberationRecord record, const Block* prev,
                        std::uint64_t timestamp) {
    if (record.outcome.success()) {
        throw WrongOutcomeError("build_empty_block requires a Hung record");
    }
    record.actions_by_round.clear();

    Block block;
    block.header.height = prev ? prev->header.height + 1 : 1;
    if (prev) block.header.previous = block_digest(*prev);
    block.header.timestamp = timestamp;
    block.header.outcome = OutcomeTag::Hung;
    block.record = std::move(record);
    block.header.body_digest = body_digest(block.record, block.transcript);
    canonical_serialize(block);
    return block;
}

}  // namespace delib::ledger
