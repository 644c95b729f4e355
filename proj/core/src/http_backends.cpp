// HTTP-backed implementations of the model and embedding interfaces.
#include <nlohmann/json.hpp>

#include "gnome/analysis.hpp"
#include "gnome/llm_client.hpp"

#include <httplib.h>

namespace gnome {

std::string HttpLlmClient::complete(const CompletionRequest& request) {
  httplib::Client cli(config_.endpoint);
  if (!cli.is_valid()) {
    throw LlmError(LlmError::Kind::Transport, false, "invalid endpoint '" + config_.endpoint + "'");
  }
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  auto res = cli.Post(config_.path, headers, request_body(request), "application/json");
  if (!res) {
    throw LlmError(LlmError::Kind::Transport, true,
                   "request to " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw LlmError(LlmError::Kind::Model, true, "server returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw LlmError(LlmError::Kind::Model, false,
                   "server returned HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  return parse_response_body(res->body);
}

HttpEmbeddings::HttpEmbeddings(std::string endpoint, std::string model, std::string api_key,
                               std::string path)
    : endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      path_(std::move(path)) {}

std::vector<Embedding> HttpEmbeddings::embed(std::span<const std::string> texts) {
  httplib::Client cli(endpoint_);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  nlohmann::json body = {{"model", model_}, {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  auto res = cli.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw Error("embedding request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw Error("embedding endpoint returned HTTP " + std::to_string(res->status));
  std::vector<Embedding> out;
  try {
    auto j = nlohmann::json::parse(res->body);
    for (const auto& item : j.at("data")) out.push_back(item.at("embedding").get<Embedding>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed embedding response: ") + e.what());
  }
  if (out.size() != texts.size()) throw Error("embedding response has the wrong number of vectors");
  if (!out.empty()) dimension_ = out.front().size();
  return out;
}

}  // namespace gnome
