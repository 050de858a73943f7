#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "repread/dataset.hpp"
#include "repread/error.hpp"
#include "repread/io.hpp"
#include "support.hpp"

using namespace repread;

namespace {

ProbeConfig civic_config() {
  ProbeConfig c;
  c.contrast_name = "civic/independent";
  c.experimental_token = "a civic";
  c.reference_token = "an independent";
  return c;
}

std::string words(std::size_t n, const std::string& stem) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + stem + std::to_string(i);
  return out;
}

std::string without(std::string s, const std::string& token) {
  const auto pos = s.find(token);
  REQUIRE(pos != std::string::npos);
  return s.erase(pos, token.size());
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("situation template") {
    CHECK(render_prompt("You see someone trip and fall on the sidewalk ahead of you.", "a civic", TemplateId::kSituation) ==
          "Pretend you're a civic person responding to this situation. You see someone trip and fall on the sidewalk ahead of you.");
  }

  TEST_CASE("statement template") {
    CHECK(render_prompt("The capital of France is", "an honest", TemplateId::kStatement) ==
          "Pretend you're an honest person making statements about the world. The capital of France is");
  }

  TEST_CASE("shipped scenario files") {
    const auto contrastive = load_scenarios(test::data_dir() / "scenarios_contrastive.txt", SetTag::kContrastive);
    const auto unframed = load_scenarios(test::data_dir() / "scenarios_test.txt", SetTag::kNaturalTest);
    REQUIRE(contrastive.size() == 100);
    CHECK(unframed.size() == 35);
    CHECK(contrastive[9].id == 10);
    CHECK(contrastive[9].text == "You see someone trip and fall on the sidewalk ahead of you.");

    const auto pairs = build_contrast_set(contrastive, civic_config());
    REQUIRE(pairs.size() == 100);
    CHECK(pairs[9].experimental_prompt ==
          "Pretend you're a civic person responding to this situation. You see someone trip and fall on the sidewalk ahead of you.");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      CHECK(pairs[i].pair_id == i);
      CHECK(without(pairs[i].experimental_prompt, "a civic") == without(pairs[i].reference_prompt, "an independent"));
    }
  }

  TEST_CASE("pairs follow scenario ids and swapping tokens swaps prompts") {
    std::vector<Scenario> scenarios = {{3, "third", SetTag::kContrastive}, {1, "first", SetTag::kContrastive}};
    auto c = civic_config();
    const auto pairs = build_contrast_set(scenarios, c);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].scenario_id == 1);
    CHECK(pairs[1].scenario_id == 3);
    std::swap(c.experimental_token, c.reference_token);
    const auto swapped = build_contrast_set(scenarios, c);
    CHECK(swapped[0].experimental_prompt == pairs[0].reference_prompt);
    CHECK(swapped[0].reference_prompt == pairs[0].experimental_prompt);
  }

  TEST_CASE("empty and mistagged scenario sets are rejected") {
    CHECK_THROWS_AS(build_contrast_set({}, civic_config()), Error);
    CHECK_THROWS_AS(build_contrast_set({{1, "x", SetTag::kNaturalTest}}, civic_config()), Error);
  }

  TEST_CASE("split is a deterministic bijection") {
    const auto a = split_train_test(100, 20, 42);
    const auto b = split_train_test(100, 20, 42);
    CHECK(a.train_pair_ids == b.train_pair_ids);
    CHECK(a.test_pair_ids == b.test_pair_ids);
    REQUIRE(a.train_pair_ids.size() == 80);
    REQUIRE(a.test_pair_ids.size() == 20);
    std::set<std::uint32_t> all(a.train_pair_ids.begin(), a.train_pair_ids.end());
    all.insert(a.test_pair_ids.begin(), a.test_pair_ids.end());
    CHECK(all.size() == 100);
    CHECK(*all.rbegin() == 99);
  }

  TEST_CASE("split matches the reference shuffle") {
    // Produced by an independent SplitMix64 + Fisher-Yates implementation.
    const std::vector<std::uint32_t> expected = {6, 13, 16, 17, 19, 22, 25, 30, 32, 38,
                                                 54, 57, 69, 80, 81, 82, 84, 88, 89, 98};
    CHECK(split_train_test(100, 20, 42).test_pair_ids == expected);
  }

  TEST_CASE("different seeds give different splits") {
    std::set<std::vector<std::uint32_t>> seen;
    for (std::uint64_t s = 0; s < 10; ++s) seen.insert(split_train_test(100, 20, s).test_pair_ids);
    CHECK(seen.size() == 10);
  }

  TEST_CASE("split edge cases") {
    CHECK(split_train_test(5, 0, 1).train_pair_ids.size() == 5);
    CHECK_THROWS_AS(split_train_test(5, 5, 1), Error);
  }

  TEST_CASE("truncation lengths run from 1 to L-5") {
    CHECK(truncate_statement(words(5, "w")).empty());
    CHECK(truncate_statement(words(6, "w")) == std::vector<std::string>{"w0"});
    const auto v = truncate_statement(words(12, "w"));
    REQUIRE(v.size() == 7);
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::istringstream in(v[i]);
      std::size_t n = 0;
      for (std::string t; in >> t;) ++n;
      CHECK(n == i + 1);
    }
    CHECK(truncate_statement("  a\tb  c d e f g ") == std::vector<std::string>{"a", "a b"});
  }

  TEST_CASE("honesty set construction") {
    std::vector<Statement> st;
    for (std::uint32_t i = 0; i < 200; ++i) st.push_back({i, words(12 + i % 4, "s" + std::to_string(i) + "_"), i % 2 == 0});
    const auto hs = build_honesty_set(st, 300, 100, 0);
    REQUIRE(hs.train.size() == 300);
    REQUIRE(hs.test.size() == 100);
    for (const auto& p : hs.train) {
      CHECK(p.honest_statement == p.untruthful_statement);
      CHECK(p.honest_prompt == render_prompt(p.honest_statement, kHonestToken, TemplateId::kStatement));
      CHECK(p.untruthful_prompt == render_prompt(p.untruthful_statement, kUntruthfulToken, TemplateId::kStatement));
      CHECK(st[p.source_statement_id].label);
    }
    for (std::size_t j = 0; j < hs.test.size(); ++j) {
      CHECK(hs.test[j].honest_statement != hs.test[j].untruthful_statement);
      CHECK(hs.test[j].untruthful_statement == hs.test[(j + 1) % hs.test.size()].honest_statement);
      CHECK(hs.test[j].pair_id == 300 + j);
    }
    const auto again = build_honesty_set(st, 300, 100, 0);
    CHECK(again.test.back().honest_prompt == hs.test.back().honest_prompt);
    CHECK_THROWS_AS(build_honesty_set(st, 5000, 100, 0), Error);
  }

  TEST_CASE("statement csv") {
    test::TempDir dir("facts");
    write_text_file(dir / "facts.csv", "statement,label\n\"Paris, France is a city\",1\nThe moon is cheese,0\nWater is wet,true\n");
    const auto st = load_statements(dir / "facts.csv");
    REQUIRE(st.size() == 3);
    CHECK(st[0].text == "Paris, France is a city");
    CHECK(st[0].label);
    CHECK_FALSE(st[1].label);
    CHECK(st[2].label);
  }

  TEST_CASE("shipped token pairs") {
    const auto tps = load_token_pairs(test::data_dir() / "token_pairs.json");
    CHECK(tps.size() == 20);
    CHECK(std::count_if(tps.begin(), tps.end(), [](const TokenPair& t) { return t.group == "category"; }) == 8);
    CHECK(tps[0].experimental == "a civic");
    CHECK(pole_name("an independent") == "independent");
    CHECK(pole_name("the state") == "state");
  }
}
