#include "delib/agent/remote.hpp"

#include <chrono>

#include "httplib.h"
#include "json.hpp"

namespace delib::agent {

RemoteBehavior::RemoteBehavior(RemoteEndpoint endpoint)
    : endpoint_(std::move(endpoint)) {}

std::string RemoteBehavior::respond(const Prompt& prompt, int) {
    httplib::Client client(endpoint_.host, endpoint_.port);
    auto timeout = std::chrono::milliseconds(endpoint_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    nlohmann::json request = {
        {"model", endpoint_.model},
        {"messages", {{{"role", "user"}, {"content", prompt.text}}}},
    };

    auto result = client.Post(endpoint_.path, request.dump(), "application/json");
    if (!result) {
        throw AgentUnavailableError("remote endpoint unreachable: " +
                                    httplib::to_string(result.error()));
    }
    if (result->status != 200) {
        throw AgentUnavailableError("remote endpoint returned status " +
                                    std::to_string(result->status));
    }
    try {
        auto reply = nlohmann::json::parse(result->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw AgentUnavailableError(std::string("malformed completion reply: ") + e.what());
    }
}

}  // namespace delib::agent
