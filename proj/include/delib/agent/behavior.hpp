#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "delib/agent/prompt.hpp"
#include "delib/core/types.hpp"

namespace delib::agent {

// Raised when an agent cannot produce a response this turn. The engine maps
// it to an abstention, never to a crash.
class AgentUnavailableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Behavior {
public:
    virtual ~Behavior() = default;

    // Produces the raw utterance body for this turn. `turn` is 0 for the
    // initial round, t for reflection turn t.
    virtual std::string respond(const Prompt& prompt, int turn) = 0;
};

// Replays a fixed script; script.at(turn) is the body for that turn, so the
// script must cover every turn the engine may reach (T+1 entries).
class ScriptedBehavior : public Behavior {
public:
    explicit ScriptedBehavior(std::vector<std::string> script);

    std::string respond(const Prompt& prompt, int turn) override;

private:
    std::vector<std::string> script_;
};

// Repeats one fixed action forever, ignoring all context.
class StubbornBehavior : public Behavior {
public:
    explicit StubbornBehavior(core::Action fixed);

    std::string respond(const Prompt& prompt, int turn) override;

private:
    std::string body_;
};

// Opinion-dynamics stand-in for a reasoning model: starts from a fixed
// action, then each reflection turn adopts the strict-majority position from
// the prompt context with probability p_adopt (one seeded draw per turn),
// keeping its own position otherwise or when no strict majority exists.
class ConvergentBehavior : public Behavior {
public:
    ConvergentBehavior(core::Action initial, double p_adopt, std::uint64_t seed);

    std::string respond(const Prompt& prompt, int turn) override;

private:
    core::Action initial_;
    double p_adopt_;
    std::mt19937_64 rng_;
};

// Always throws AgentUnavailableError; models a dead or unreachable agent.
class UnavailableBehavior : public Behavior {
public:
    std::string respond(const Prompt& prompt, int turn) override;
};

}  // namespace delib::agent
