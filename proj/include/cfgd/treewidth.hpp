#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cfgd/relational.hpp"

namespace cfgd {

// Rooted unranked tree of bags over element ids.
struct TreeDecomposition {
  struct Bag {
    std::vector<int> elems;  // sorted, unique
    int parent = -1;
    std::vector<int> children;
  };
  std::vector<Bag> bags;
  int root = -1;

  int add_bag(std::vector<int> elems, int parent);
  bool empty() const { return bags.empty(); }
  int width() const;  // max bag size - 1; 0 when empty (convention)
};

// Undirected co-occurrence graph over element ids.
struct PrimalGraph {
  int n = 0;
  std::vector<std::set<int>> adj;

  void ensure(int v);
  void add_edge(int u, int v);
  bool has_edge(int u, int v) const {
    return u == v || (u < n && adj[u].count(v) > 0);
  }
  static PrimalGraph of_instance(const Instance& inst);
};

// Checks fact coverage and element connectedness; returns the width.
int validate_decomposition(const Instance& inst, const TreeDecomposition& td);

// Same checks against a graph (edges instead of facts).
int validate_decomposition(const PrimalGraph& g, const TreeDecomposition& td);

// Min-fill elimination heuristic with min-degree tie-breaking; ties broken
// by smallest element id so the result is deterministic. Always valid, not
// guaranteed minimal width.
TreeDecomposition decompose_minfill(const Instance& inst);
TreeDecomposition decompose_minfill(const PrimalGraph& g);

// True iff every parent/child bag intersection induces a clique in g.
// Validates the decomposition against g first.
bool check_simplicial(const PrimalGraph& g, const TreeDecomposition& td);

// A fact whose arguments are names of D_k = {a_1,...,a_{2k+2}},
// stored as indices 0..2k+1.
struct EncFact {
  int rel = -1;
  std::vector<uint8_t> args;
  friend bool operator==(const EncFact&, const EncFact&) = default;
};

// Rooted full ordered binary tree labeled over Gamma^k_sigma: each node
// carries a set d of at most k+1 names of D_k and at most one fact over d.
struct TreeEncoding {
  struct Node {
    uint32_t d = 0;  // bitmask over D_k indices
    std::optional<EncFact> fact;
    int left = -1, right = -1, parent = -1;
  };
  int k = 0;
  Signature sig;
  std::vector<Node> nodes;
  int root = -1;
  // Auxiliary: when produced by encode(), the instance fact index encoded
  // at each node (-1 for fact-free nodes).
  std::vector<int> node_fact;

  int domain_size() const { return 2 * k + 2; }
  int add_node(uint32_t d, std::optional<EncFact> fact);
  static std::string dk_name(int idx) { return "a" + std::to_string(idx + 1); }
};

// Checks all TreeEncoding invariants (fullness, |d| <= k+1, fact domain
// within d, arities). Throws ValidationError on violation.
void validate_encoding(const TreeEncoding& e);

// Builds a tree encoding of inst following td; requires width(td) <= k.
// decode(encode(inst, td, k)) is isomorphic to inst.
TreeEncoding encode(const Instance& inst, const TreeDecomposition& td, int k);

// Decodes greedily, one fresh element per a-connected subtree. The result is
// unique up to isomorphism. `name_offset` shifts the fresh names, giving an
// independently constructed bag decoding for the decoding-invariance tests.
Instance decode(const TreeEncoding& e, int name_offset = 0);

// PACE-2017 .td import/export. The mapping text has one `<vertex> <element>`
// pair per line, linking PACE vertex numbers to element names.
TreeDecomposition read_td(const std::string& td_text,
                          const std::string& mapping_text, Instance& inst);
std::string write_td(const Instance& inst, const TreeDecomposition& td,
                     std::string* mapping_out);

std::string encoding_to_json(const TreeEncoding& e);

}  // namespace cfgd
