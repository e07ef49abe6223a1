#pragma once

#include <string>

#include "delib/agent/behavior.hpp"

namespace delib::agent {

struct RemoteEndpoint {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string path = "/v1/chat/completions";
    std::string model = "default";
    int timeout_ms = 10000;
};

// Chat-completion client: posts the prompt text as a single user message and
// returns the assistant reply text. Connection failure, timeout, non-200
// status, or a malformed reply all throw AgentUnavailableError.
class RemoteBehavior : public Behavior {
public:
    explicit RemoteBehavior(RemoteEndpoint endpoint);

    std::string respond(const Prompt& prompt, int turn) override;

private:
    RemoteEndpoint endpoint_;
};

}  // namespace delib::agent
