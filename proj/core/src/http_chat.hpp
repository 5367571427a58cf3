#pragma once

#include <memory>

#include "credrag/gateway.hpp"

namespace credrag::gateway::detail {

std::unique_ptr<Backend> make_http_chat_backend(const BackendConfig& config);

}  // namespace credrag::gateway::detail
