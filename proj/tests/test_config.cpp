#include <doctest.h>

#include "preact/config.hpp"
#include "test_support.hpp"

using namespace preact;

TEST_CASE("config loads providers and defaults") {
    auto config = Config::load(preact::testing::data_dir() / "config.yaml");
    REQUIRE(config.has_value());
    CHECK(config->providers.size() == 2);
    CHECK(config->defaults.mode == Mode::Preact);
    CHECK(config->defaults.n_runs == 50);
    CHECK(config->defaults.max_iterations == 8);
    CHECK(config->defaults.temperature == doctest::Approx(0.0));

    const ProviderConfig* demo = config->find_provider("demo");
    REQUIRE(demo != nullptr);
    CHECK(demo->kind == ProviderConfig::Kind::Scripted);
    // Relative fixtures resolve against the config file's directory.
    CHECK(demo->fixture == preact::testing::data_dir() / "scripted_3tool.jsonl");

    const ProviderConfig* live = config->find_provider("live");
    REQUIRE(live != nullptr);
    CHECK(live->kind == ProviderConfig::Kind::Http);
    CHECK(live->auth_env == "TEST_API_KEY");
}

TEST_CASE("scripted provider factories replay the fixture") {
    auto config = Config::load(preact::testing::data_dir() / "config.yaml");
    REQUIRE(config.has_value());
    auto factory = config->provider_factory("demo");
    REQUIRE(factory.has_value());
    auto port = factory.value()();
    auto completion = port->complete(LlmRequest{"m", {}, 0.0});
    REQUIRE(completion.has_value());
    CHECK(completion->find("Step 1:") == 0);
}

TEST_CASE("unknown provider ids are errors") {
    Config config;
    auto factory = config.provider_factory("nope");
    REQUIRE(!factory.has_value());
    CHECK(factory.error().message.find("nope") != std::string::npos);
}

TEST_CASE("invalid configs are rejected with messages") {
    CHECK(!Config::parse("providers: [not, a, map]").has_value());
    CHECK(!Config::parse("providers:\n  p: {kind: smoke}\n").has_value());
    CHECK(!Config::parse("providers:\n  p: {kind: http}\n").has_value());
    CHECK(!Config::parse("providers:\n  p: {kind: scripted}\n").has_value());
    CHECK(!Config::parse("defaults: {mode: sideways}\n").has_value());
    CHECK(!Config::load("/nonexistent/config.yaml").has_value());
}

TEST_CASE("missing scripted fixtures fail at completion time") {
    auto config = Config::parse("providers:\n  p: {kind: scripted, fixture: /nonexistent.jsonl}\n");
    REQUIRE(config.has_value());
    auto factory = config->provider_factory("p");
    REQUIRE(factory.has_value());
    auto port = factory.value()();
    auto completion = port->complete(LlmRequest{"m", {}, 0.0});
    REQUIRE(!completion.has_value());
    CHECK(completion.error().message.find("fixture") != std::string::npos);
}
