#include <gtest/gtest.h>

#include <random>
#include <set>

#include "gnome/domainmap.hpp"
#include "gnome/error.hpp"
#include "oracles.hpp"

namespace gnome {
namespace {

using namespace std::chrono_literals;

ParsedGeneration ok(std::string_view raw, std::size_t n) {
  auto r = parse_generation(raw, n);
  EXPECT_TRUE(std::holds_alternative<ParsedGeneration>(r)) << raw;
  return std::holds_alternative<ParsedGeneration>(r) ? std::get<ParsedGeneration>(r) : ParsedGeneration{};
}

FailureKind fails(std::string_view raw, std::size_t n) {
  auto r = parse_generation(raw, n);
  EXPECT_TRUE(std::holds_alternative<FailureKind>(r)) << raw;
  return std::holds_alternative<FailureKind>(r) ? std::get<FailureKind>(r) : FailureKind::ModelError;
}

TEST(ParseGeneration, WellFormed) {
  auto p = ok("NEW_DOMAIN{Boat Charter}\nHi there [EOS]\nHello! [EOS]\n", 2);
  EXPECT_EQ(p.domain_title, "Boat Charter");
  EXPECT_EQ(p.utterances, (std::vector<std::string>{"Hi there", "Hello!"}));
}

TEST(ParseGeneration, DoubledBracesAndSpeakerTags) {
  auto p = ok("Sure.\nNEW_DOMAIN{{ Art Sale }}\nA: one [EOS] B: two [EOS]", 2);
  EXPECT_EQ(p.domain_title, "Art Sale");
  EXPECT_EQ(p.utterances, (std::vector<std::string>{"one", "two"}));
}

TEST(ParseGeneration, TrailingTextWithoutEosCountsAsSegment) {
  EXPECT_EQ(ok("NEW_DOMAIN{X}\na [EOS] b", 2).utterances, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(fails("NEW_DOMAIN{X}\na [EOS] b", 1), FailureKind::MisplacedEos);
}

TEST(ParseGeneration, Failures) {
  EXPECT_EQ(fails("", 2), FailureKind::EmptyGeneration);
  EXPECT_EQ(fails(" \n\t", 2), FailureKind::EmptyGeneration);
  EXPECT_EQ(fails("a [EOS] b [EOS]", 2), FailureKind::MissingDomainHeader);
  EXPECT_EQ(fails("NEW_DOMAIN{}\na [EOS] b [EOS]", 2), FailureKind::MissingDomainHeader);
  EXPECT_EQ(fails("NEW_DOMAIN{X\na [EOS]", 1), FailureKind::MissingDomainHeader);
  EXPECT_EQ(fails("NEW_DOMAIN{X}\n [EOS] [EOS]", 2), FailureKind::EmptyGeneration);
  EXPECT_EQ(fails("NEW_DOMAIN{X}\na [EOS] b [EOS] c [EOS]", 2), FailureKind::MisplacedEos);
  EXPECT_THROW(parse_generation("NEW_DOMAIN{X} a", 0), PreconditionError);
}

TEST(Prompt, RendersEveryUtteranceAndKeepsTemplates) {
  Dialogue d;
  d.id = "x";
  d.utterances = {{Speaker::A, "first\nline", {}}, {Speaker::B, "second", {}}};
  auto p = build_prompt(d);
  EXPECT_EQ(p.system, system_template());
  EXPECT_NE(p.user.find(render_dialogue(d)), std::string::npos);
  EXPECT_EQ(p.user.find("{dialogue}"), std::string::npos);
  EXPECT_NE(user_template().find("[EOS]"), std::string_view::npos);
  EXPECT_NE(system_template().find("NEW_DOMAIN{{"), std::string_view::npos);
  EXPECT_EQ(render_dialogue(d).find("first\nline"), std::string::npos);
}

TEST(RequestSeed, PureAndDistinct) {
  EXPECT_EQ(request_seed(1, DatasetId::CaSiNo, "a", 1), request_seed(1, DatasetId::CaSiNo, "a", 1));
  std::set<std::uint64_t> seen;
  for (auto src : kSourceDatasets) {
    for (std::size_t g = 1; g <= 10; ++g) seen.insert(request_seed(1, src, "d1", g));
  }
  EXPECT_EQ(seen.size(), 40u);
  EXPECT_NE(request_seed(1, DatasetId::CaSiNo, "a", 1), request_seed(2, DatasetId::CaSiNo, "a", 1));
}

SeedDataset small_seed(std::size_t k) {
  std::mt19937_64 rng(21);
  std::map<DatasetId, Corpus> corpora;
  for (auto id : kSourceDatasets) corpora[id] = testing::random_mapped_corpus(id, 4, rng);
  return select_seed(corpora, k);
}

GenerationParams fast_params(std::size_t n) {
  GenerationParams p;
  p.n_passes = n;
  p.backoff_initial = 1ms;
  p.backoff_max = 2ms;
  return p;
}

TEST(DomainMapping, AllSucceedWithMock) {
  auto seed = small_seed(2);
  MockLlmClient client;
  auto r = run_domain_mapping(client, seed, fast_params(3));
  auto t = r.report.total();
  EXPECT_EQ(t.attempts, 24u);
  EXPECT_EQ(t.successes, 24u);
  EXPECT_EQ(r.generated.dialogues.size(), 24u);
  EXPECT_EQ(r.generated.stage, Stage::Generated);
  for (const auto& d : r.generated.dialogues) {
    ASSERT_TRUE(d.provenance);
    const auto* s = seed.find(d.provenance->seed_source, d.provenance->seed_id);
    ASSERT_NE(s, nullptr);
    ASSERT_EQ(d.utterances.size(), s->utterances.size());
    for (std::size_t i = 0; i < d.utterances.size(); ++i) {
      EXPECT_EQ(d.utterances[i].labels, s->utterances[i].labels);
      EXPECT_EQ(d.utterances[i].speaker, s->utterances[i].speaker);
    }
  }
}

TEST(DomainMapping, ParseFaultsAreTalliedNotRetried) {
  auto seed = small_seed(2);
  for (auto fault : {MockFault::DropEos, MockFault::ExtraEos, MockFault::NoHeader, MockFault::Empty}) {
    MockLlmClient client(MockLlmClient::every(fault, 1));
    auto r = run_domain_mapping(client, seed, fast_params(2));
    auto t = r.report.total();
    EXPECT_EQ(t.attempts, 16u);
    EXPECT_EQ(t.successes, 0u);
    EXPECT_EQ(t.retries, 0u);
    EXPECT_EQ(client.calls(), 16u);
    EXPECT_EQ(t.failed(), 16u);
  }
}

TEST(DomainMapping, TransientErrorsAreRetried) {
  auto seed = small_seed(1);
  MockLlmClient client({}, 2);
  auto p = fast_params(2);
  p.max_retries = 3;
  auto r = run_domain_mapping(client, seed, p);
  auto t = r.report.total();
  EXPECT_EQ(t.successes, 8u);
  EXPECT_EQ(t.retries, 16u);
  EXPECT_EQ(client.calls(), 24u);
}

TEST(DomainMapping, PersistentTransportErrorsExhaustRetries) {
  auto seed = small_seed(1);
  MockLlmClient client(MockLlmClient::every(MockFault::TransportError, 1));
  auto p = fast_params(1);
  p.max_retries = 2;
  auto r = run_domain_mapping(client, seed, p);
  auto t = r.report.total();
  EXPECT_EQ(t.failures[static_cast<std::size_t>(FailureKind::TransportError)], 4u);
  EXPECT_EQ(client.calls(), 12u);
  EXPECT_TRUE(r.generated.dialogues.empty());
}

TEST(DomainMapping, OutputIndependentOfConcurrency) {
  auto seed = small_seed(3);
  MockLlmClient a, b;
  auto p1 = fast_params(4);
  p1.max_in_flight = 1;
  auto p8 = p1;
  p8.max_in_flight = 8;
  EXPECT_EQ(run_domain_mapping(a, seed, p1).generated, run_domain_mapping(b, seed, p8).generated);
}

TEST(DomainMapping, RejectsZeroPasses) {
  MockLlmClient client;
  EXPECT_THROW(run_domain_mapping(client, small_seed(1), fast_params(0)), PreconditionError);
}

TEST(HttpClient, ResponseBodyParsing) {
  EXPECT_EQ(HttpLlmClient::parse_response_body(R"({"choices":[{"message":{"content":"hi"}}]})"), "hi");
  EXPECT_THROW(HttpLlmClient::parse_response_body(R"({"choices":[]})"), LlmError);
  EXPECT_THROW(HttpLlmClient::parse_response_body("not json"), LlmError);
}

TEST(HttpClient, UnreachableEndpointIsTransportError) {
  HttpLlmConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1";
  cfg.timeout = 500ms;
  HttpLlmClient client(cfg);
  try {
    client.complete({"s", "u", 1.0, 1});
    FAIL() << "expected LlmError";
  } catch (const LlmError& e) {
    EXPECT_EQ(e.kind(), LlmError::Kind::Transport);
  }
}

}  // namespace
}  // namespace gnome
