#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "cfgd/engine.hpp"

#include "doctest.h"
#include "helpers.hpp"

using namespace cfgd;
using namespace cfgd::testing;

namespace {

void check_against_truth_table(const Program& p, const Instance& i,
                               const PipelineConfig& cfg = {}) {
  ProvenanceResult prov = query_provenance(p, i, cfg);
  TruthTable tt = brute_provenance(p, i);
  int n = i.size();
  for (uint32_t mask = 0; mask < (1u << n); mask++) {
    std::vector<char> present(n, 0);
    for (int f = 0; f < n; f++) present[f] = mask >> f & 1;
    GateValuation v = prov.valuation(present);
    CHECK(eval_stratified(prov.cycluit, v).value == tt.row(mask));
  }
}

}  // namespace

TEST_CASE("provenance of a one-atom query is the OR of its facts") {
  Program p = parse_program("Goal() :- R(X,Y).\n");
  Instance i = parse_instance("R(1,2). R(3,4).\n");
  check_against_truth_table(p, i);
}

TEST_CASE("provenance of the guarded complement program, 8 valuations") {
  Program p = parse_program(kReachComplementProgram);
  Instance i = parse_instance("A(1). R(1,2). B(3).\n");
  check_against_truth_table(p, i);
}

TEST_CASE("provenance over the empty instance is a constant circuit") {
  Program p = parse_program(kReachComplementProgram);
  Instance i(p.extensional_signature());
  ProvenanceResult prov = query_provenance(p, i);
  GateValuation v(prov.cycluit.num_gates(), 0);
  CHECK(eval_stratified(prov.cycluit, v).value == naive_eval(p, i).goal);
}

TEST_CASE("input gates are exactly the facts") {
  Program p = parse_program(kReachComplementProgram);
  Instance i = parse_instance("A(1). R(1,2). B(3).\n");
  ProvenanceResult prov = query_provenance(p, i);
  auto inputs = prov.cycluit.input_gates();
  CHECK(static_cast<int>(inputs.size()) == i.size());
  for (int f = 0; f < i.size(); f++) {
    int g = prov.input_gate_of_fact[f];
    CHECK(prov.cycluit.type(g) == GateType::Input);
    CHECK(prov.cycluit.labels().at(g) == i.fact_to_string(i.facts()[f]));
  }
  // The attached stratification remains valid after input renaming.
  validate_stratification(prov.cycluit, prov.cycluit.attached_strat);
}

TEST_CASE("evaluate matches naive_eval on the worked examples") {
  Program p = parse_program(kReachComplementProgram);
  CHECK(evaluate(p, parse_instance("A(1). R(1,2). B(3).\n")));
  CHECK(!evaluate(p, parse_instance("A(1). R(1,2). B(2).\n")));
}

TEST_CASE("evaluate uses the provided decomposition and width override") {
  Program p = parse_program(kReachComplementProgram);
  Instance i = parse_instance("A(1). R(1,2). B(3).\n");
  PipelineConfig cfg;
  cfg.decomposition = decompose_minfill(i);
  cfg.treewidth_override = 3;
  PipelineStats stats;
  CHECK(evaluate(p, i, cfg, &stats));
  CHECK(stats.k == 3);
  cfg.treewidth_override = 0;
  CHECK_THROWS_WITH_AS(evaluate(p, i, cfg), doctest::Contains("width-exceeds"),
                       ValidationError);
}

TEST_CASE("provenance specializes to evaluation at the all-ones valuation") {
  for (uint64_t seed = 0; seed < 25; seed++) {
    Program p = random_gn_program(seed, 8);
    auto gen = random_tw_instance(seed + 99, 2, 8);
    ProvenanceResult prov = query_provenance(p, gen.instance);
    std::vector<char> all(gen.instance.size(), 1);
    CHECK(eval_stratified(prov.cycluit, prov.valuation(all)).value ==
          evaluate(p, gen.instance));
  }
}

TEST_CASE("pipeline equals naive_eval across the random GN corpus") {
  for (uint64_t seed = 0; seed < 80; seed++) {
    Program p = random_gn_program(seed, 8);
    auto gen = random_tw_instance(seed * 3 + 1, 1 + (seed % 2), 9);
    PipelineConfig cfg;
    cfg.decomposition = gen.td;
    CHECK(evaluate(p, gen.instance, cfg) == naive_eval(p, gen.instance).goal);
  }
}

TEST_CASE("provenance exhaustion on small random pairs") {
  for (uint64_t seed = 0; seed < 10; seed++) {
    Program p = random_gn_program(seed, 6);
    auto gen = random_tw_instance(seed + 7, 2, 5);
    check_against_truth_table(p, gen.instance);
  }
}

TEST_CASE("unguarded negation: fallback policy") {
  Program p = parse_program(
      "T(X,Y) :- E(X,Y).\nGoal() :- U(X), V(Y), not T(X,Y).\n");
  Instance i = parse_instance("U(1). V(2). E(1,2).\n");
  PipelineConfig cfg;
  cfg.fallback = PipelineConfig::Fallback::Error;
  CHECK_THROWS_AS(evaluate(p, i, cfg), UnguardedNegationError);
  CHECK_THROWS_AS(query_provenance(p, i), UnguardedNegationError);
  cfg.fallback = PipelineConfig::Fallback::Naive;
  CHECK(evaluate(p, i, cfg) == naive_eval(p, i).goal);
  CHECK(!evaluate(p, i, cfg));  // E(1,2) makes T(1,2) hold
  Instance j = parse_instance("U(1). V(2). E(2,1).\n");
  CHECK(evaluate(p, j, cfg));
}

TEST_CASE("non-CFG programs also fall back") {
  Program p = parse_program(kTransitiveProgram);
  Instance i = parse_instance("R(1,2). R(2,3).\n");
  CHECK(evaluate(p, i) == naive_eval(p, i).goal);
}

TEST_CASE("determinism: identical runs give byte-identical exports") {
  Program p = parse_program(kReachComplementProgram);
  Instance i = parse_instance("A(1). R(1,2). R(2,3). B(3). B(9).\n");
  ProvenanceResult a = query_provenance(p, i);
  ProvenanceResult b = query_provenance(p, i);
  CHECK(export_cycluit_json(a.cycluit) == export_cycluit_json(b.cycluit));
}

TEST_CASE("stats report pipeline dimensions") {
  Program p = parse_program(kReachComplementProgram);
  Instance i = parse_instance("A(1). R(1,2). B(3).\n");
  PipelineStats stats;
  evaluate(p, i, {}, &stats);
  CHECK(stats.gates > 0);
  CHECK(stats.encoding_nodes > 0);
  CHECK(stats.satwa_states > 0);
  CHECK(stats.k >= 1);
}
