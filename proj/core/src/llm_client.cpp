#include "gnome/llm_client.hpp"

#include <array>
#include <nlohmann/json.hpp>

#include "gnome/domainmap.hpp"
#include "gnome/text.hpp"

namespace gnome {

using nlohmann::json;

HttpLlmClient::HttpLlmClient(HttpLlmConfig config) : config_(std::move(config)) {}

std::string HttpLlmClient::request_body(const CompletionRequest& request) const {
  json body = {{"model", config_.model},
               {"messages",
                json::array({{{"role", "system"}, {"content", request.system}},
                             {{"role", "user"}, {"content", request.user}}})},
               {"temperature", request.temperature},
               {"seed", request.seed},
               {"max_tokens", config_.max_tokens}};
  return body.dump();
}

std::string HttpLlmClient::parse_response_body(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw LlmError(LlmError::Kind::Model, true, std::string("unparseable response: ") + e.what());
  }
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw LlmError(LlmError::Kind::Model, false, "response has no choices[0].message.content");
  }
}

namespace {

constexpr std::array<std::string_view, 24> kMockDomains = {
    "Antique Auction",        "Vintage Guitar Sale",    "Office Lease Renewal",
    "Wedding Catering",       "Used Car Trade-In",      "Film Festival Slots",
    "Farmers Market Stall",   "Freelance Design Fee",   "Boat Charter",
    "Concert Ticket Resale",  "Community Garden Plots", "Art Gallery Commission",
    "Textbook Exchange",      "Ski Equipment Rental",   "Bakery Supply Contract",
    "Coworking Desk Share",   "Telescope Purchase",     "Moving Truck Booking",
    "Pet Sitting Rates",      "Solar Panel Install",    "Museum Loan Agreement",
    "Robotics Club Budget",   "Fishing Gear Swap",      "Theatre Costume Hire",
};

std::vector<std::string> dialogue_texts(const std::string& user) {
  auto tmpl = user_template();
  auto placeholder = tmpl.find("{dialogue}");
  auto prefix = tmpl.substr(0, placeholder);
  auto suffix = tmpl.substr(placeholder + std::string_view("{dialogue}").size());
  if (user.compare(0, prefix.size(), prefix) != 0 || user.size() < prefix.size() + suffix.size()) {
    throw LlmError(LlmError::Kind::Model, false, "mock client: request is not a domain-mapping prompt");
  }
  std::string_view body(user);
  body = body.substr(prefix.size(), body.size() - prefix.size() - suffix.size());
  std::vector<std::string> texts;
  for (auto line : split(body, '\n')) {
    if (line.size() >= 3 && line[1] == ':' && line[2] == ' ') line.remove_prefix(3);
    texts.emplace_back(line);
  }
  return texts;
}

}  // namespace

MockLlmClient::FaultPolicy MockLlmClient::every(MockFault fault, std::uint64_t modulus) {
  return [fault, modulus](const CompletionRequest& r) {
    return modulus != 0 && r.seed % modulus == 0 ? fault : MockFault::None;
  };
}

std::size_t MockLlmClient::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::string MockLlmClient::complete(const CompletionRequest& request) {
  {
    std::lock_guard lock(mu_);
    ++calls_;
    if (transient_failures_ > 0 && seen_[request.seed]++ < transient_failures_) {
      throw LlmError(LlmError::Kind::Transport, true, "mock client: transient failure");
    }
  }
  const MockFault fault = policy_ ? policy_(request) : MockFault::None;
  if (fault == MockFault::TransportError) {
    throw LlmError(LlmError::Kind::Transport, true, "mock client: connection refused");
  }
  if (fault == MockFault::Empty) return "  \n";

  const auto title = std::string(kMockDomains[request.seed % kMockDomains.size()]);
  auto texts = dialogue_texts(request.user);
  if (fault != MockFault::Echo) {
    for (auto& t : texts) t = "[" + title + "] " + t;
  }

  std::string out;
  if (fault != MockFault::NoHeader) out += "NEW_DOMAIN{" + title + "}\n";
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out += texts[i];
    const bool drop = fault == MockFault::DropEos && i == 0 && texts.size() > 1;
    out += drop ? " " : " [EOS]\n";
    if (fault == MockFault::ExtraEos && i == 0) out += "Indeed. [EOS]\n";
  }
  return out;
}

}  // namespace gnome
