#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cfgd/satwa.hpp"

namespace cfgd {

enum class GateType : uint8_t { Input, And, Or, Not };

// A Boolean circuit whose wire graph may contain cycles. Gates are dense
// ints; wires are directed src -> dst. freeze() builds CSR adjacency used
// by the evaluators; mutation after freeze() invalidates it.
class Cycluit {
 public:
  int add_gate(GateType t);
  void set_type(int g, GateType t);
  void add_wire(int src, int dst);
  void set_output(int g) { output_ = g; }
  int output() const { return output_; }

  int num_gates() const { return static_cast<int>(types_.size()); }
  int64_t num_wires() const;
  GateType type(int g) const { return types_[g]; }

  void set_label(int g, const std::string& label) { labels_[g] = label; }
  const std::unordered_map<int, std::string>& labels() const { return labels_; }

  std::vector<int> input_gates() const;

  void freeze() const;
  // Valid after freeze():
  const int32_t* inputs_of(int g, int* n) const;
  const int32_t* outputs_of(int g, int* n) const;
  int fanin(int g) const;
  int not_input(int g) const;  // the single input of a NOT gate

  // Optional stratification attached by a builder (e.g. build_provenance);
  // evaluators use it when present instead of recomputing one.
  std::vector<int> attached_strat;

 private:
  std::vector<GateType> types_;
  mutable std::vector<std::pair<int32_t, int32_t>> wires_;  // cleared on freeze
  int output_ = -1;
  std::unordered_map<int, std::string> labels_;

  mutable bool frozen_ = false;
  mutable std::vector<int64_t> in_off_, out_off_;
  mutable std::vector<int32_t> in_src_, out_dst_;
};

class NotMonotoneError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NegationCycleError : public ValidationError {
 public:
  NegationCycleError(const std::string& msg, std::vector<int> cycle)
      : ValidationError(msg), cycle(std::move(cycle)) {}
  std::vector<int> cycle;
};

// Valuations map input gates to {0,1}; both evaluators return the set of
// true gates as a bitmap over all gates.
using GateValuation = std::vector<char>;

// Naive fixpoint (quadratic): iterate the immediate consequence of AND/OR
// gates until stable.
GateValuation eval_monotone_naive(const Cycluit& c, const GateValuation& v);

// Fan-in counters and a LIFO worklist; O(gates + wires).
GateValuation eval_monotone_linear(const Cycluit& c, const GateValuation& v);

// SCC condensation stratification; throws NegationCycleError with a witness
// cycle if some cycle passes through a NOT gate.
std::vector<int> stratify_cycluit(const Cycluit& c);

// Checks the stratification conditions: strat(g) = 0 iff g is an input,
// non-decreasing along wires, strictly increasing into NOT gates.
void validate_stratification(const Cycluit& c, const std::vector<int>& strat);

struct StratifiedEvalResult {
  bool value = false;
  GateValuation full;
};

// Stratum by stratum: NOT gates read completed lower strata, the rest
// evaluates monotonically. Uses c.attached_strat when present, else the
// override, else stratify_cycluit.
StratifiedEvalResult eval_stratified(const Cycluit& c, const GateValuation& v,
                                     const std::vector<int>* strat = nullptr);

// Provenance cycluit of an annotated SATWA on a tree (Gamma-tree with
// {0,1} node annotations as circuit inputs). Only (state, node) pairs
// reachable from the initial state at the root are materialized.
struct ProvenanceCircuit {
  Cycluit circuit;
  std::vector<int> node_input_gate;  // tree node -> its input gate
  int64_t live_pairs = 0;            // materialized (state, node) pairs
};

ProvenanceCircuit build_provenance(AnnotatedSatwa& a, const TreeEncoding& t);

std::string export_cycluit_json(const Cycluit& c);
std::string export_cycluit_dot(const Cycluit& c);
Cycluit import_cycluit_json(const std::string& text);

}  // namespace cfgd
