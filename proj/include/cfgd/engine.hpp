#pragma once

#include <optional>

#include "cfgd/cycluit.hpp"
#include "cfgd/datalog.hpp"
#include "cfgd/satwa.hpp"
#include "cfgd/treewidth.hpp"

namespace cfgd {

struct PipelineConfig {
  std::optional<int> treewidth_override;
  std::optional<TreeDecomposition> decomposition;
  enum class Fallback { Naive, Error } fallback = Fallback::Naive;
};

struct PipelineStats {
  int width = 0;
  int k = 0;
  int64_t encoding_nodes = 0;
  int64_t satwa_states = 0;
  int64_t satwa_size = 0;  // states + memoized transition formula sizes
  int64_t gates = 0;
  int64_t wires = 0;
  int64_t live_pairs = 0;
  bool used_fallback = false;
};

class UnguardedNegationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Boolean provenance of p on i as a stratified cycluit whose input gates
// are exactly the facts of i (in instance fact order); the encoding's
// fact-free input nodes are replaced by constant-0 gates.
struct ProvenanceResult {
  Cycluit cycluit;
  std::vector<int> input_gate_of_fact;  // instance fact index -> gate id
  PipelineStats stats;

  GateValuation valuation(const std::vector<char>& fact_present) const;
};

// decompose (or take cfg.decomposition) -> encode -> compile -> lift ->
// build_provenance -> rename fact inputs. Requires check_cfg and check_gn
// to pass (provenance has no naive fallback).
ProvenanceResult query_provenance(const Program& p, const Instance& i,
                                  const PipelineConfig& cfg = {});

// Provenance pipeline evaluated at the all-ones valuation when the program
// has guarded negation; otherwise the fallback policy decides between
// naive evaluation (with a warning) and an error.
bool evaluate(const Program& p, const Instance& i,
              const PipelineConfig& cfg = {}, PipelineStats* stats = nullptr);

}  // namespace cfgd
