#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace aai {

struct Pronunciation {
  std::string word;
  std::vector<std::string> phones;

  friend bool operator==(const Pronunciation&, const Pronunciation&) = default;
};

struct PronDict {
  std::vector<Pronunciation> entries;  // file order, (word, phones) unique
};

/// MFA lexicon: word, up to four numeric probability columns, then phones.
/// When a tab is present the word is everything before the first tab.
PronDict parse_mfa_dict(std::istream& in);

struct GraphEdge {
  std::size_t a = 0;
  std::size_t b = 0;         // a < b
  std::size_t position = 0;  // differing phone index
  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
  friend auto operator<=>(const GraphEdge&, const GraphEdge&) = default;
};

/// Vertices are dictionary entries (by index); an edge joins two
/// pronunciations of equal length differing at exactly one phone.
class MinimalPairGraph {
 public:
  MinimalPairGraph() = default;
  MinimalPairGraph(std::vector<Pronunciation> vertices, std::vector<GraphEdge> edges);

  const std::vector<Pronunciation>& vertices() const noexcept { return vertices_; }
  const std::vector<GraphEdge>& edges() const noexcept { return edges_; }
  /// Sorted neighbour lists.
  const std::vector<std::size_t>& neighbors(std::size_t v) const { return adjacency_[v]; }
  bool adjacent(std::size_t a, std::size_t b) const;

 private:
  std::vector<Pronunciation> vertices_;
  std::vector<GraphEdge> edges_;  // sorted
  std::vector<std::vector<std::size_t>> adjacency_;
};

/// Bucketed construction: each pronunciation is keyed once per position with
/// that position masked, so only genuine candidates are ever compared.
MinimalPairGraph build_graph(const PronDict& dict);

using Clique = std::vector<std::size_t>;

/// Maximal cliques of size >= min_size (Bron-Kerbosch, Tomita pivot). Each
/// clique is sorted; the list is sorted lexicographically.
std::vector<Clique> enumerate_cliques(const std::vector<std::vector<std::size_t>>& adjacency,
                                      std::size_t min_size);
std::vector<Clique> enumerate_cliques(const MinimalPairGraph& graph, std::size_t min_size);

enum class PhoneClass { vowel, consonant, any };

std::string to_string(PhoneClass c);
PhoneClass parse_phone_class(const std::string& text);

using PhoneInventory = std::map<std::string, PhoneClass>;

/// JSON object mapping phone -> "vowel" | "consonant".
PhoneInventory parse_inventory(std::istream& in);

struct MinimalPairSet {
  std::string set_id;
  std::vector<Pronunciation> members;
  std::size_t position = 0;
  std::vector<std::string> contrasts;  // member order
};

/// Keeps cliques whose members all differ at one shared position and whose
/// contrasting phones all belong to `position_class`. Set ids are
/// "mp<index>" over the retained list.
std::vector<MinimalPairSet> cliques_to_sets(const std::vector<Clique>& cliques,
                                            const MinimalPairGraph& graph,
                                            PhoneClass position_class,
                                            const PhoneInventory& inventory);

/// Seeded sample of at most max_sets sets, keeping the input order.
/// max_sets == 0 keeps everything.
std::vector<MinimalPairSet> sample_sets(std::vector<MinimalPairSet> sets, std::size_t max_sets,
                                        std::uint64_t seed);

std::string set_to_json_line(const MinimalPairSet& set);

}  // namespace aai
