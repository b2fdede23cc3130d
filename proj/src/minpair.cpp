#include "aai/minpair.hpp"

#include <algorithm>
#include <cstdlib>
#include <istream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "aai/error.hpp"
#include "aai/random.hpp"

namespace aai {
namespace {

bool is_number(const std::string& token) {
  if (token.empty()) return false;
  char* end = nullptr;
  std::strtod(token.c_str(), &end);
  return end == token.c_str() + token.size();
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  for (std::string tok; ss >> tok;) out.push_back(std::move(tok));
  return out;
}

std::vector<std::size_t> intersect(const std::vector<std::size_t>& a,
                                   const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

struct BronKerbosch {
  const std::vector<std::vector<std::size_t>>& adj;
  std::size_t min_size;
  std::vector<Clique> out;

  void run(std::vector<std::size_t>& r, std::vector<std::size_t> p, std::vector<std::size_t> x) {
    if (p.empty()) {
      if (x.empty() && r.size() >= min_size) {
        Clique c = r;
        std::sort(c.begin(), c.end());
        out.push_back(std::move(c));
      }
      return;
    }
    // Pivot: vertex of P u X with the most neighbours in P, lowest id on ties.
    std::size_t pivot = 0;
    std::size_t best = 0;
    bool have = false;
    auto consider = [&](std::size_t u) {
      const std::size_t k = intersect(p, adj[u]).size();
      if (!have || k > best || (k == best && u < pivot)) {
        pivot = u;
        best = k;
        have = true;
      }
    };
    for (std::size_t u : p) consider(u);
    for (std::size_t u : x) consider(u);

    std::vector<std::size_t> candidates;
    std::set_difference(p.begin(), p.end(), adj[pivot].begin(), adj[pivot].end(),
                        std::back_inserter(candidates));
    for (std::size_t v : candidates) {
      r.push_back(v);
      run(r, intersect(p, adj[v]), intersect(x, adj[v]));
      r.pop_back();
      p.erase(std::lower_bound(p.begin(), p.end(), v));
      x.insert(std::lower_bound(x.begin(), x.end(), v), v);
    }
  }
};

}  // namespace

PronDict parse_mfa_dict(std::istream& in) {
  PronDict dict;
  std::set<std::pair<std::string, std::vector<std::string>>> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;

    std::string word;
    std::vector<std::string> rest;
    const auto tab = text.find('\t');
    const auto lead = text.find_first_not_of(" \t");
    if (tab != std::string::npos && tab > lead) {
      word = text.substr(lead, tab - lead);
      while (!word.empty() && word.back() == ' ') word.pop_back();
      rest = split_ws(text.substr(tab + 1));
    } else {
      rest = split_ws(text);
      word = rest.front();
      rest.erase(rest.begin());
    }
    std::size_t skip = 0;
    while (skip < rest.size() && skip < 4 && is_number(rest[skip])) ++skip;
    rest.erase(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(skip));
    if (rest.empty()) {
      throw ParseError("dictionary line " + std::to_string(line) + ": word '" + word +
                       "' has no phones");
    }
    if (seen.emplace(word, rest).second) {
      dict.entries.push_back({std::move(word), std::move(rest)});
    }
  }
  if (dict.entries.empty()) throw ParseError("dictionary is empty");
  return dict;
}

MinimalPairGraph::MinimalPairGraph(std::vector<Pronunciation> vertices,
                                   std::vector<GraphEdge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)), adjacency_(vertices_.size()) {
  std::sort(edges_.begin(), edges_.end());
  for (const auto& e : edges_) {
    adjacency_[e.a].push_back(e.b);
    adjacency_[e.b].push_back(e.a);
  }
  for (auto& n : adjacency_) std::sort(n.begin(), n.end());
}

bool MinimalPairGraph::adjacent(std::size_t a, std::size_t b) const {
  const auto& n = adjacency_[a];
  return std::binary_search(n.begin(), n.end(), b);
}

MinimalPairGraph build_graph(const PronDict& dict) {
  // Key: phones joined with a separator that cannot occur inside a token,
  // with the masked slot left empty, prefixed by the masked position.
  std::unordered_map<std::string, std::vector<std::size_t>> buckets;
  for (std::size_t v = 0; v < dict.entries.size(); ++v) {
    const auto& phones = dict.entries[v].phones;
    for (std::size_t p = 0; p < phones.size(); ++p) {
      std::string key = std::to_string(phones.size()) + '\x1f' + std::to_string(p);
      for (std::size_t k = 0; k < phones.size(); ++k) {
        key += '\x1f';
        if (k != p) key += phones[k];
      }
      buckets[key].push_back(v);
    }
  }
  std::vector<GraphEdge> edges;
  for (const auto& [key, members] : buckets) {
    const std::size_t pos = std::stoul(key.substr(key.find('\x1f') + 1));
    for (std::size_t x = 0; x < members.size(); ++x) {
      for (std::size_t y = x + 1; y < members.size(); ++y) {
        const auto a = members[x];
        const auto b = members[y];
        // Homophones share a bucket at every position but are not pairs.
        if (dict.entries[a].phones[pos] == dict.entries[b].phones[pos]) continue;
        edges.push_back({std::min(a, b), std::max(a, b), pos});
      }
    }
  }
  return MinimalPairGraph(dict.entries, std::move(edges));
}

std::vector<Clique> enumerate_cliques(const std::vector<std::vector<std::size_t>>& adjacency,
                                      std::size_t min_size) {
  if (min_size < 2) throw DataError("min_size must be at least 2");
  BronKerbosch bk{adjacency, min_size, {}};
  std::vector<std::size_t> r;
  std::vector<std::size_t> p(adjacency.size());
  for (std::size_t v = 0; v < p.size(); ++v) p[v] = v;
  bk.run(r, std::move(p), {});
  std::sort(bk.out.begin(), bk.out.end());
  return std::move(bk.out);
}

std::vector<Clique> enumerate_cliques(const MinimalPairGraph& graph, std::size_t min_size) {
  std::vector<std::vector<std::size_t>> adj(graph.vertices().size());
  for (std::size_t v = 0; v < adj.size(); ++v) adj[v] = graph.neighbors(v);
  return enumerate_cliques(adj, min_size);
}

std::string to_string(PhoneClass c) {
  switch (c) {
    case PhoneClass::vowel: return "vowel";
    case PhoneClass::consonant: return "consonant";
    case PhoneClass::any: return "any";
  }
  return "any";
}

PhoneClass parse_phone_class(const std::string& text) {
  if (text == "vowel") return PhoneClass::vowel;
  if (text == "consonant") return PhoneClass::consonant;
  if (text == "any") return PhoneClass::any;
  throw ParseError("unknown phone class '" + text + "'");
}

PhoneInventory parse_inventory(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("phone inventory: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("phone inventory must be a JSON object");
  PhoneInventory inv;
  for (const auto& [phone, cls] : j.items()) {
    if (!cls.is_string()) throw ParseError("phone inventory: class of '" + phone + "' must be a string");
    const auto c = parse_phone_class(cls.get<std::string>());
    if (c == PhoneClass::any) throw ParseError("phone inventory: '" + phone + "' must be vowel or consonant");
    inv.emplace(phone, c);
  }
  return inv;
}

std::vector<MinimalPairSet> cliques_to_sets(const std::vector<Clique>& cliques,
                                            const MinimalPairGraph& graph,
                                            PhoneClass position_class,
                                            const PhoneInventory& inventory) {
  std::vector<MinimalPairSet> sets;
  const auto& verts = graph.vertices();
  for (const Clique& clique : cliques) {
    if (clique.size() < 2) continue;
    // Pairwise Hamming-1 members share a position iff every member differs
    // from the first one at the same index.
    const auto& first = verts[clique[0]].phones;
    std::size_t pos = first.size();
    bool consistent = true;
    for (std::size_t m = 1; m < clique.size() && consistent; ++m) {
      const auto& other = verts[clique[m]].phones;
      for (std::size_t k = 0; k < first.size(); ++k) {
        if (first[k] == other[k]) continue;
        if (pos == first.size()) pos = k;
        else if (pos != k) consistent = false;
        break;
      }
    }
    if (!consistent || pos == first.size()) continue;

    MinimalPairSet set;
    set.position = pos;
    bool keep = true;
    for (std::size_t v : clique) {
      const std::string& phone = verts[v].phones[pos];
      if (!inventory.empty() || position_class != PhoneClass::any) {
        const auto it = inventory.find(phone);
        if (it == inventory.end()) {
          throw DataError("phone '" + phone + "' (word '" + verts[v].word +
                          "') missing from the phone inventory");
        }
        if (position_class != PhoneClass::any && it->second != position_class) keep = false;
      }
      set.members.push_back(verts[v]);
      set.contrasts.push_back(phone);
    }
    if (!keep) continue;
    set.set_id = "mp" + std::to_string(sets.size());
    sets.push_back(std::move(set));
  }
  return sets;
}

std::vector<MinimalPairSet> sample_sets(std::vector<MinimalPairSet> sets, std::size_t max_sets,
                                        std::uint64_t seed) {
  if (max_sets == 0 || sets.size() <= max_sets) return sets;
  std::vector<std::size_t> idx(sets.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
  Rng rng(seed);
  rng.shuffle(idx);
  idx.resize(max_sets);
  std::sort(idx.begin(), idx.end());
  std::vector<MinimalPairSet> out;
  out.reserve(max_sets);
  for (std::size_t k : idx) out.push_back(std::move(sets[k]));
  return out;
}

std::string set_to_json_line(const MinimalPairSet& set) {
  nlohmann::ordered_json j;
  j["set_id"] = set.set_id;
  j["position"] = set.position;
  j["contrasts"] = set.contrasts;
  auto members = nlohmann::ordered_json::array();
  for (const auto& m : set.members) {
    nlohmann::ordered_json e;
    e["word"] = m.word;
    e["phones"] = m.phones;
    members.push_back(std::move(e));
  }
  j["members"] = std::move(members);
  return j.dump();
}

}  // namespace aai
