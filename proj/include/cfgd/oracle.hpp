#pragma once

#include <cstdint>

#include "cfgd/datalog.hpp"
#include "cfgd/treewidth.hpp"

namespace cfgd {

// Acceptance of every subinstance, indexed by fact-presence bitmask (bit f
// set = fact f of the instance kept). Valuation semantics keep the full
// instance's active domain.
struct TruthTable {
  std::vector<Fact> fact_order;
  std::vector<char> accept;  // size 2^n

  bool row(uint32_t mask) const { return accept[mask]; }
};

TruthTable brute_provenance(const Program& p, const Instance& i);  // |i| <= 20

// The conciseness family: rho_0: R_0(x,y) <- R(x,y); rho_j: R_j(x,y) <-
// G(x,y), R_{j-1}(x,z), R_{j-1}(z,y); Goal() <- R_i(x,y). Body size 6.
Program gen_pn(int i);

struct GeneratedInstance {
  Instance instance;
  TreeDecomposition td;
};

// R-chain of length 2^i plus the aligned G-facts that make gen_pn(i)
// accept, with the recursive interval decomposition of width 2. i <= 16.
GeneratedInstance gen_pn_instance(int i);

// The fixed extensional signature shared by the random generators:
// E/2, F/2, U/1, V/1.
Signature oracle_signature();

// Random stratified programs that always pass check_cfg, check_gn and
// stratify, with body size <= body_size_cap.
Program random_gn_program(uint64_t seed, int body_size_cap);

// Random instances built by gluing random bags along a random tree; the
// returned decomposition is valid at the requested width. Relations are
// drawn from `sig` (default: oracle_signature()).
GeneratedInstance random_tw_instance(uint64_t seed, int width,
                                     int target_facts,
                                     const Signature* sig = nullptr);

}  // namespace cfgd
