#include "cfgd/engine.hpp"

#include <cstdio>

namespace cfgd {

GateValuation ProvenanceResult::valuation(
    const std::vector<char>& fact_present) const {
  GateValuation v(cycluit.num_gates(), 0);
  for (size_t fi = 0; fi < input_gate_of_fact.size(); fi++)
    if (fact_present[fi]) v[input_gate_of_fact[fi]] = 1;
  return v;
}

ProvenanceResult query_provenance(const Program& p, const Instance& i,
                                  const PipelineConfig& cfg) {
  auto cfg_report = check_cfg(p);
  if (!cfg_report.pass)
    throw UnguardedNegationError(
        "program is not clique-frontier-guarded; provenance is unavailable");
  auto gn_report = check_gn(p);
  if (!gn_report.pass)
    throw UnguardedNegationError(
        "unguarded-negation: program has unguarded intensional negation; "
        "provenance is unavailable (evaluate falls back per policy)");

  TreeDecomposition td =
      cfg.decomposition ? *cfg.decomposition : decompose_minfill(i);
  int width = validate_decomposition(i, td);
  int k = cfg.treewidth_override.value_or(width);
  TreeEncoding enc = encode(i, td, k);  // throws width-exceeds-k

  std::unique_ptr<CompiledSatwa> satwa = compile(p, k);
  TreeEncoding aligned = align_encoding(enc, p);
  LiftedSatwa lifted(*satwa);
  ProvenanceCircuit prov = build_provenance(lifted, aligned);

  ProvenanceResult res;
  res.stats.width = width;
  res.stats.k = k;
  res.stats.encoding_nodes = static_cast<int64_t>(enc.nodes.size());
  res.stats.live_pairs = prov.live_pairs;

  // Fact-coding input nodes become the fact's input gate; the rest turn
  // into constant-0 gates (an OR with no inputs).
  res.input_gate_of_fact.assign(i.size(), -1);
  for (size_t w = 0; w < enc.nodes.size(); w++) {
    int g = prov.node_input_gate[w];
    int fi = enc.node_fact[w];
    if (fi >= 0) {
      res.input_gate_of_fact[fi] = g;
      prov.circuit.set_label(g, i.fact_to_string(i.facts()[fi]));
    } else {
      prov.circuit.set_type(g, GateType::Or);
      prov.circuit.attached_strat[g] = 1;
    }
  }
  res.stats.satwa_states = satwa->num_states();
  res.stats.satwa_size = satwa->measured_size();
  res.stats.gates = prov.circuit.num_gates();
  res.stats.wires = prov.circuit.num_wires();
  res.cycluit = std::move(prov.circuit);
  return res;
}

bool evaluate(const Program& p, const Instance& i, const PipelineConfig& cfg,
              PipelineStats* stats) {
  stratify(p);  // not-stratifiable programs error out on both paths
  if (check_cfg(p).pass && check_gn(p).pass) {
    ProvenanceResult prov = query_provenance(p, i, cfg);
    if (stats) *stats = prov.stats;
    GateValuation ones(prov.cycluit.num_gates(), 1);
    return eval_stratified(prov.cycluit, ones).value;
  }
  if (cfg.fallback == PipelineConfig::Fallback::Error)
    throw UnguardedNegationError(
        "unguarded-negation: program is outside the compiled fragment "
        "(CFG with guarded negation) and the fallback policy is 'error'");
  std::fprintf(stderr,
               "warning: program has unguarded intensional negation; falling "
               "back to direct stratified evaluation (no provenance, not "
               "FPT-bilinear)\n");
  if (stats) stats->used_fallback = true;
  return naive_eval(p, i).goal;
}

}  // namespace cfgd
