#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "gnome/error.hpp"

namespace gnome {

struct CompletionRequest {
  std::string system;
  std::string user;
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

class LlmError : public Error {
 public:
  enum class Kind { Transport, Model };

  LlmError(Kind kind, bool retryable, const std::string& what)
      : Error(what), kind_(kind), retryable_(retryable) {}

  Kind kind() const { return kind_; }
  bool retryable() const { return retryable_; }

 private:
  Kind kind_;
  bool retryable_;
};

// Chat-completion backend. Implementations must be safe to call from several
// threads at once.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  // Returns the generated text or throws LlmError.
  virtual std::string complete(const CompletionRequest& request) = 0;
};

struct HttpLlmConfig {
  // Base URL, e.g. "http://localhost:8000"; the request goes to
  // `<endpoint><path>`.
  std::string endpoint = "http://localhost:8000";
  std::string path = "/v1/chat/completions";
  std::string model = "meta-llama/Meta-Llama-3-70B-Instruct";
  std::string api_key;  // sent as a bearer token when nonempty
  std::chrono::milliseconds timeout{120000};
  int max_tokens = 4096;
};

// OpenAI-compatible chat-completions client.
class HttpLlmClient : public LlmClient {
 public:
  explicit HttpLlmClient(HttpLlmConfig config);
  std::string complete(const CompletionRequest& request) override;

  // Request body as sent on the wire.
  std::string request_body(const CompletionRequest& request) const;
  // Extracts choices[0].message.content; throws LlmError(Model) otherwise.
  static std::string parse_response_body(const std::string& body);

 private:
  HttpLlmConfig config_;
};

enum class MockFault {
  None,
  Echo,            // returns the seed dialogue verbatim (leakage)
  DropEos,         // merges the first two utterances
  ExtraEos,        // splits the first utterance in two
  NoHeader,        // omits NEW_DOMAIN{...}
  Empty,           // returns whitespace only
  TransportError,  // always throws a retryable transport error
};

// Deterministic stand-in for a generator model. It rewrites the dialogue in
// the request into one of a fixed list of domains chosen from the request
// seed, so the output depends only on the request.
class MockLlmClient : public LlmClient {
 public:
  using FaultPolicy = std::function<MockFault(const CompletionRequest&)>;

  MockLlmClient() = default;
  explicit MockLlmClient(FaultPolicy policy, std::size_t transient_failures = 0)
      : policy_(std::move(policy)), transient_failures_(transient_failures) {}

  std::string complete(const CompletionRequest& request) override;

  // Applies `fault` to requests whose seed is divisible by `modulus`.
  static FaultPolicy every(MockFault fault, std::uint64_t modulus);

  std::size_t calls() const;

 private:
  FaultPolicy policy_;
  // The first N calls for each distinct request fail with a retryable error.
  std::size_t transient_failures_ = 0;
  mutable std::mutex mu_;
  std::map<std::uint64_t, std::size_t> seen_;
  std::size_t calls_ = 0;
};

}  // namespace gnome
