#include <set>
#include <sstream>

#include "doctest.h"

#include "aai/error.hpp"
#include "aai/minpair.hpp"
#include "aai/random.hpp"
#include "oracles.hpp"

using aai::PhoneClass;

namespace {

aai::PronDict dict_of(const std::string& text) {
  std::istringstream in(text);
  return aai::parse_mfa_dict(in);
}

std::set<std::tuple<std::size_t, std::size_t, std::size_t>> edge_set(const aai::MinimalPairGraph& g) {
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> out;
  for (const auto& e : g.edges()) out.emplace(e.a, e.b, e.position);
  return out;
}

const aai::PhoneInventory kInventory = {
    {"b", PhoneClass::consonant}, {"k", PhoneClass::consonant}, {"t", PhoneClass::consonant},
    {"d", PhoneClass::consonant}, {"p", PhoneClass::consonant}, {"æ", PhoneClass::vowel},
    {"ɪ", PhoneClass::vowel},     {"ʌ", PhoneClass::vowel}};

}  // namespace

TEST_CASE("MFA dictionary parsing") {
  SUBCASE("canonical line") {
    const auto d = dict_of("cat\tk æ t\n");
    REQUIRE(d.entries.size() == 1);
    CHECK(d.entries[0].word == "cat");
    CHECK(d.entries[0].phones == std::vector<std::string>{"k", "æ", "t"});
  }
  SUBCASE("probability columns are skipped") {
    const auto d = dict_of("cat\t0.99\tk æ t\n");
    CHECK(d.entries[0].phones == std::vector<std::string>{"k", "æ", "t"});
    const auto d4 = dict_of("cat\t0.99\t0.1\t1.0\t0.5\tk æ t\n");
    CHECK(d4.entries[0].phones == std::vector<std::string>{"k", "æ", "t"});
  }
  SUBCASE("space separated and duplicates collapse") {
    const auto d = dict_of("cat k æ t\ncat k æ t\n\ncat\tk a t\n");
    REQUIRE(d.entries.size() == 2);
    CHECK(d.entries[1].phones[1] == "a");
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(dict_of(""), aai::ParseError);
    CHECK_THROWS_WITH_AS(dict_of("cat\tk æ t\ndog\t0.5\n"), doctest::Contains("line 2"), aai::ParseError);
  }
}

TEST_CASE("minimal pair graph") {
  SUBCASE("hamming one edges only") {
    const auto g = aai::build_graph(dict_of("bat\tb æ t\ncat\tk æ t\nbad\tb æ d\n"));
    const std::set<std::tuple<std::size_t, std::size_t, std::size_t>> expected = {{0, 1, 0}, {0, 2, 2}};
    CHECK(edge_set(g) == expected);
    CHECK_FALSE(g.adjacent(1, 2));
  }
  SUBCASE("single word") { CHECK(aai::build_graph(dict_of("a\tə\n")).edges().empty()); }
  SUBCASE("homophones and length differences are not pairs") {
    const auto g = aai::build_graph(dict_of("two\tt u\ntoo\tt u\ntoe\tt oʊ\nat\tæ t\nats\tæ t s\n"));
    const std::set<std::tuple<std::size_t, std::size_t, std::size_t>> expected = {{0, 2, 1}, {1, 2, 1}};
    CHECK(edge_set(g) == expected);
  }
  SUBCASE("equals all-pairs oracle on random dictionaries") {
    aai::Rng rng(21);
    const std::vector<std::string> alphabet = {"a", "b", "c", "d", "e", "f"};
    for (int trial = 0; trial < 40; ++trial) {
      std::ostringstream text;
      const std::size_t entries = 1 + rng.index(50);
      for (std::size_t k = 0; k < entries; ++k) {
        text << "w" << k;
        const std::size_t len = 1 + rng.index(4);
        for (std::size_t p = 0; p < len; ++p) text << ' ' << alphabet[rng.index(3 + trial % 4)];
        text << '\n';
      }
      const auto dict = dict_of(text.str());
      std::vector<std::vector<std::string>> prons;
      for (const auto& e : dict.entries) prons.push_back(e.phones);
      CHECK(edge_set(aai::build_graph(dict)) == oracle::hamming_edges(prons));
    }
  }
}

TEST_CASE("Bron-Kerbosch") {
  SUBCASE("triangle") {
    const std::vector<std::vector<std::size_t>> adj = {{1, 2}, {0, 2}, {0, 1}};
    CHECK(aai::enumerate_cliques(adj, 2) == std::vector<aai::Clique>{{0, 1, 2}});
  }
  SUBCASE("path") {
    const std::vector<std::vector<std::size_t>> adj = {{1}, {0, 2}, {1}};
    CHECK(aai::enumerate_cliques(adj, 2) == std::vector<aai::Clique>{{0, 1}, {1, 2}});
    CHECK(aai::enumerate_cliques(adj, 3).empty());
  }
  SUBCASE("isolated vertices are never reported") {
    const std::vector<std::vector<std::size_t>> adj = {{}, {2}, {1}};
    CHECK(aai::enumerate_cliques(adj, 2) == std::vector<aai::Clique>{{1, 2}});
  }
  SUBCASE("min_size below two is rejected") {
    CHECK_THROWS_AS(aai::enumerate_cliques(std::vector<std::vector<std::size_t>>{}, 1), aai::DataError);
  }
  SUBCASE("equals subset enumeration, output is maximal") {
    aai::Rng rng(77);
    for (int trial = 0; trial < 60; ++trial) {
      const std::size_t n = 1 + rng.index(12);
      const double p = rng.uniform(0.1, 0.9);
      std::vector<std::vector<bool>> dense(n, std::vector<bool>(n, false));
      std::vector<std::vector<std::size_t>> adj(n);
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
          if (rng.uniform() < p) {
            dense[a][b] = dense[b][a] = true;
            adj[a].push_back(b);
            adj[b].push_back(a);
          }
        }
      }
      for (auto& l : adj) std::sort(l.begin(), l.end());
      const auto got = aai::enumerate_cliques(adj, 2);
      CHECK(got == oracle::subset_maximal_cliques(dense, 2));
      for (const auto& c : got) {
        for (std::size_t v = 0; v < n; ++v) {
          if (std::find(c.begin(), c.end(), v) != c.end()) continue;
          bool extends = true;
          for (std::size_t u : c) extends = extends && dense[u][v];
          CHECK_FALSE(extends);
        }
      }
    }
  }
}

TEST_CASE("cliques to minimal pair sets") {
  SUBCASE("consonant pair") {
    const auto g = aai::build_graph(dict_of("bat\tb æ t\ncat\tk æ t\n"));
    const auto sets = aai::cliques_to_sets(aai::enumerate_cliques(g, 2), g, PhoneClass::consonant, kInventory);
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].position == 0);
    CHECK(sets[0].contrasts == std::vector<std::string>{"b", "k"});
    CHECK(sets[0].set_id == "mp0");
    CHECK(aai::cliques_to_sets(aai::enumerate_cliques(g, 2), g, PhoneClass::vowel, kInventory).empty());
  }
  SUBCASE("mixed positions are discarded") {
    // A clique of two edges at different positions cannot arise from the
    // graph with three members, so hand a two-position clique directly.
    const auto g = aai::build_graph(dict_of("bat\tb æ t\ncat\tk æ t\nbad\tb æ d\n"));
    const auto sets = aai::cliques_to_sets({{0, 1, 2}}, g, PhoneClass::any, kInventory);
    CHECK(sets.empty());
  }
  SUBCASE("vowel set retained") {
    const auto g = aai::build_graph(dict_of("bit\tb ɪ t\nbat\tb æ t\nbut\tb ʌ t\n"));
    const auto cliques = aai::enumerate_cliques(g, 2);
    REQUIRE(cliques.size() == 1);
    const auto sets = aai::cliques_to_sets(cliques, g, PhoneClass::vowel, kInventory);
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].position == 1);
    CHECK(sets[0].members.size() == 3);
  }
  SUBCASE("unmapped contrast phone") {
    const auto g = aai::build_graph(dict_of("bat\tb æ t\nzat\tz æ t\n"));
    CHECK_THROWS_WITH_AS(aai::cliques_to_sets(aai::enumerate_cliques(g, 2), g, PhoneClass::consonant, kInventory),
                         doctest::Contains("'z'"), aai::DataError);
  }
  SUBCASE("every emitted set is a true minimal pair set") {
    aai::Rng rng(5);
    std::ostringstream text;
    for (int k = 0; k < 200; ++k) {
      text << "w" << k << '\t' << (rng.index(2) ? "b" : "k") << ' '
           << (rng.index(3) == 0 ? "æ" : rng.index(2) ? "ɪ" : "ʌ") << ' ' << (rng.index(2) ? "t" : "d") << '\n';
    }
    const auto g = aai::build_graph(dict_of(text.str()));
    for (const auto& s : aai::cliques_to_sets(aai::enumerate_cliques(g, 2), g, PhoneClass::any, kInventory)) {
      REQUIRE(s.members.size() >= 2);
      std::set<std::string> distinct(s.contrasts.begin(), s.contrasts.end());
      CHECK(distinct.size() == s.contrasts.size());
      for (std::size_t a = 0; a < s.members.size(); ++a) {
        for (std::size_t b = a + 1; b < s.members.size(); ++b) {
          std::size_t diff = 0;
          for (std::size_t k = 0; k < s.members[a].phones.size(); ++k) {
            if (s.members[a].phones[k] != s.members[b].phones[k]) {
              ++diff;
              CHECK(k == s.position);
            }
          }
          CHECK(diff == 1);
        }
      }
    }
  }
}

TEST_CASE("seeded set sampling") {
  std::vector<aai::MinimalPairSet> sets(20);
  for (std::size_t k = 0; k < sets.size(); ++k) sets[k].set_id = "mp" + std::to_string(k);
  const auto a = aai::sample_sets(sets, 5, 1);
  const auto b = aai::sample_sets(sets, 5, 1);
  REQUIRE(a.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) CHECK(a[k].set_id == b[k].set_id);
  CHECK(aai::sample_sets(sets, 0, 1).size() == 20);
  CHECK(aai::sample_sets(sets, 50, 1).size() == 20);
}

TEST_CASE("inventory parsing") {
  std::istringstream ok(R"({"a": "vowel", "t": "consonant"})");
  const auto inv = aai::parse_inventory(ok);
  CHECK(inv.at("a") == PhoneClass::vowel);
  std::istringstream bad(R"({"a": "liquid"})");
  CHECK_THROWS_AS(aai::parse_inventory(bad), aai::ParseError);
}
