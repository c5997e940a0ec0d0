#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "helpers.hpp"

using namespace cfgd;
using namespace cfgd::testing;

namespace {

// A one-node tree over a trivial alphabet for hand-built automata tests.
TreeEncoding one_node_tree() {
  TreeEncoding t;
  t.k = 0;
  t.root = t.add_node(0, std::nullopt);
  return t;
}

// AnnotatedSatwa with fixed per-(state, annotation) formulas.
class TableSatwa : public AnnotatedSatwa {
 public:
  int initial = 0;
  std::vector<int> strata{0};
  std::map<std::pair<int, bool>, FormulaPtr> table;

  int initial_state() override { return initial; }
  int stratum(int q) const override { return strata[q]; }
  FormulaPtr delta(int q, const Label&, bool ann) override {
    auto it = table.find({q, ann});
    return it == table.end() ? f_false() : it->second;
  }
};

}  // namespace

TEST_CASE("empty AND gate is true, empty OR gate is false") {
  Cycluit c;
  int g_and = c.add_gate(GateType::And);
  int g_or = c.add_gate(GateType::Or);
  c.set_output(g_and);
  GateValuation v(2, 0);
  auto s = eval_monotone_naive(c, v);
  CHECK(s[g_and]);
  CHECK(!s[g_or]);
  auto s2 = eval_monotone_linear(c, v);
  CHECK(s2 == s);
}

TEST_CASE("self-loop OR follows its seed input") {
  // g0 = OR(g0, x)
  Cycluit c;
  int x = c.add_gate(GateType::Input);
  int g0 = c.add_gate(GateType::Or);
  c.add_wire(g0, g0);
  c.add_wire(x, g0);
  c.set_output(g0);
  GateValuation v(2, 0);
  CHECK(!eval_monotone_naive(c, v)[g0]);
  CHECK(!eval_monotone_linear(c, v)[g0]);
  v[x] = 1;
  CHECK(eval_monotone_naive(c, v)[g0]);
  CHECK(eval_monotone_linear(c, v)[g0]);
}

TEST_CASE("monotone evaluators reject NOT gates") {
  Cycluit c;
  int x = c.add_gate(GateType::Input);
  int n = c.add_gate(GateType::Not);
  c.add_wire(x, n);
  c.set_output(n);
  GateValuation v(2, 0);
  CHECK_THROWS_AS(eval_monotone_naive(c, v), NotMonotoneError);
  CHECK_THROWS_AS(eval_monotone_linear(c, v), NotMonotoneError);
}

TEST_CASE("differential: linear equals naive on random monotone cycluits") {
  std::mt19937_64 rng(12345);
  for (int round = 0; round < 2000; round++) {
    Cycluit c = random_monotone_cycluit(rng, 50);
    for (int trial = 0; trial < 4; trial++) {
      GateValuation v(c.num_gates(), 0);
      for (int g = 0; g < c.num_gates(); g++)
        if (c.type(g) == GateType::Input) v[g] = rng() % 2;
      CHECK(eval_monotone_naive(c, v) == eval_monotone_linear(c, v));
    }
  }
}

TEST_CASE("monotonicity of the least fixpoint") {
  std::mt19937_64 rng(777);
  for (int round = 0; round < 200; round++) {
    Cycluit c = random_monotone_cycluit(rng, 30);
    GateValuation v(c.num_gates(), 0), w(c.num_gates(), 0);
    for (int g = 0; g < c.num_gates(); g++) {
      if (c.type(g) != GateType::Input) continue;
      v[g] = rng() % 2;
      w[g] = v[g] || (rng() % 2);
    }
    auto sv = eval_monotone_linear(c, v);
    auto sw = eval_monotone_linear(c, w);
    for (int g = 0; g < c.num_gates(); g++)
      if (sv[g]) CHECK(sw[g]);
  }
}

TEST_CASE("least fixpoint: no proper closed subset exists") {
  std::mt19937_64 rng(4242);
  for (int round = 0; round < 50; round++) {
    Cycluit c = random_monotone_cycluit(rng, 10);
    c.freeze();
    GateValuation v(c.num_gates(), 0);
    for (int g = 0; g < c.num_gates(); g++)
      if (c.type(g) == GateType::Input) v[g] = rng() % 2;
    auto s = eval_monotone_linear(c, v);
    // Check closure of s, and that every strict subset of true gates that
    // contains the inputs violates some closure condition.
    auto closed = [&](const GateValuation& t) {
      for (int g = 0; g < c.num_gates(); g++) {
        int deg;
        const int32_t* in = c.inputs_of(g, &deg);
        if (c.type(g) == GateType::Input) {
          if (t[g] != v[g]) return false;
          continue;
        }
        bool any = false, all = true;
        for (int i = 0; i < deg; i++) {
          any = any || t[in[i]];
          all = all && t[in[i]];
        }
        if (c.type(g) == GateType::Or && any && !t[g]) return false;
        if (c.type(g) == GateType::And && all && !t[g]) return false;
      }
      return true;
    };
    CHECK(closed(s));
    std::vector<int> true_non_inputs;
    for (int g = 0; g < c.num_gates(); g++)
      if (s[g] && c.type(g) != GateType::Input) true_non_inputs.push_back(g);
    if (true_non_inputs.size() <= 12) {
      for (uint32_t mask = 0; mask + 1 < (1u << true_non_inputs.size());
           mask++) {
        GateValuation t(c.num_gates(), 0);
        for (int g = 0; g < c.num_gates(); g++)
          if (c.type(g) == GateType::Input) t[g] = v[g];
        for (size_t b = 0; b < true_non_inputs.size(); b++)
          if (mask >> b & 1) t[true_non_inputs[b]] = 1;
        CHECK(!closed(t));
      }
    }
  }
}

TEST_CASE("stratification of an acyclic circuit exists and validates") {
  Cycluit c;
  int x = c.add_gate(GateType::Input);
  int n = c.add_gate(GateType::Not);
  int o = c.add_gate(GateType::Or);
  c.add_wire(x, n);
  c.add_wire(n, o);
  c.add_wire(x, o);
  c.set_output(o);
  auto strat = stratify_cycluit(c);
  validate_stratification(c, strat);
  CHECK(strat[x] == 0);
  CHECK(strat[n] > 0);
}

TEST_CASE("negation cycle is rejected with a witness") {
  Cycluit c;
  int g = c.add_gate(GateType::Not);
  c.add_wire(g, g);
  c.set_output(g);
  try {
    stratify_cycluit(c);
    CHECK(false);
  } catch (const NegationCycleError& e) {
    REQUIRE(!e.cycle.empty());
    CHECK(e.cycle[0] == g);
  }

  Cycluit d;
  int x = d.add_gate(GateType::Input);
  int o = d.add_gate(GateType::Or);
  int n = d.add_gate(GateType::Not);
  d.add_wire(x, o);
  d.add_wire(n, o);
  d.add_wire(o, n);
  d.set_output(o);
  CHECK_THROWS_AS(stratify_cycluit(d), NegationCycleError);
}

TEST_CASE("SCC stratification example: g1=OR(g2,x), g2=AND(g1), g3=NOT(g1)") {
  Cycluit c;
  int x = c.add_gate(GateType::Input);
  int g1 = c.add_gate(GateType::Or);
  int g2 = c.add_gate(GateType::And);
  int g3 = c.add_gate(GateType::Not);
  c.add_wire(g2, g1);
  c.add_wire(x, g1);
  c.add_wire(g1, g2);
  c.add_wire(g1, g3);
  c.set_output(g3);
  auto strat = stratify_cycluit(c);
  CHECK(strat[g1] == strat[g2]);
  CHECK(strat[g1] < strat[g3]);
}

TEST_CASE("eval_stratified: NOT of a false input is true") {
  Cycluit c;
  int x = c.add_gate(GateType::Input);
  int n = c.add_gate(GateType::Not);
  c.add_wire(x, n);
  c.set_output(n);
  GateValuation v(2, 0);
  CHECK(eval_stratified(c, v).value);
  v[x] = 1;
  CHECK(!eval_stratified(c, v).value);
}

TEST_CASE("eval_stratified equals monotone evaluation on monotone cycluits") {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 300; round++) {
    Cycluit c = random_monotone_cycluit(rng, 40);
    GateValuation v(c.num_gates(), 0);
    for (int g = 0; g < c.num_gates(); g++)
      if (c.type(g) == GateType::Input) v[g] = rng() % 2;
    auto mono = eval_monotone_linear(c, v);
    auto strat = eval_stratified(c, v);
    CHECK(mono == strat.full);
  }
}

TEST_CASE("eval_stratified agrees across two valid stratifications") {
  std::mt19937_64 rng(31337);
  for (int round = 0; round < 300; round++) {
    Cycluit c = random_stratified_cycluit(rng, 40);
    auto s1 = stratify_cycluit(c);
    // A second valid stratification: double every stratum.
    auto s2 = s1;
    for (auto& s : s2) s *= 2;
    validate_stratification(c, s2);
    GateValuation v(c.num_gates(), 0);
    for (int g = 0; g < c.num_gates(); g++)
      if (c.type(g) == GateType::Input) v[g] = rng() % 2;
    auto r1 = eval_stratified(c, v, &s1);
    auto r2 = eval_stratified(c, v, &s2);
    CHECK(r1.full == r2.full);
    CHECK(r1.value == r2.value);
  }
}

TEST_CASE("provenance of a trivially-true automaton is constant true") {
  TableSatwa a;
  a.table[{0, true}] = f_true();
  a.table[{0, false}] = f_true();
  TreeEncoding t = one_node_tree();
  auto prov = build_provenance(a, t);
  validate_stratification(prov.circuit, prov.circuit.attached_strat);
  for (int bit = 0; bit < 2; bit++) {
    GateValuation v(prov.circuit.num_gates(), 0);
    v[prov.node_input_gate[0]] = bit;
    CHECK(eval_stratified(prov.circuit, v).value);
  }
}

TEST_CASE("provenance of a trivially-false automaton is constant false") {
  TableSatwa a;
  TreeEncoding t = one_node_tree();
  auto prov = build_provenance(a, t);
  for (int bit = 0; bit < 2; bit++) {
    GateValuation v(prov.circuit.num_gates(), 0);
    v[prov.node_input_gate[0]] = bit;
    CHECK(!eval_stratified(prov.circuit, v).value);
  }
}

TEST_CASE("fact-sensitive one-node automaton reduces to the input gate") {
  TableSatwa a;
  a.table[{0, true}] = f_true();
  a.table[{0, false}] = f_false();
  TreeEncoding t = one_node_tree();
  auto prov = build_provenance(a, t);
  for (int bit = 0; bit < 2; bit++) {
    GateValuation v(prov.circuit.num_gates(), 0);
    v[prov.node_input_gate[0]] = bit;
    CHECK(eval_stratified(prov.circuit, v).value == (bit == 1));
  }
}

TEST_CASE("provenance respects stratified negation across states") {
  // State 1 (stratum 1) accepts iff state 0 (stratum 0) has no run, and
  // state 0 runs iff the node is annotated 1.
  TableSatwa a;
  a.initial = 1;
  a.strata = {0, 1};
  a.table[{0, true}] = f_true();
  a.table[{1, true}] = f_nlit(0);
  a.table[{1, false}] = f_nlit(0);
  TreeEncoding t = one_node_tree();
  auto prov = build_provenance(a, t);
  validate_stratification(prov.circuit, prov.circuit.attached_strat);
  GateValuation v(prov.circuit.num_gates(), 0);
  CHECK(eval_stratified(prov.circuit, v).value);
  v[prov.node_input_gate[0]] = 1;
  CHECK(!eval_stratified(prov.circuit, v).value);
}

TEST_CASE("provenance matches the run-existence oracle on random automata") {
  // Random small annotated SATWAs over a 3-node tree.
  std::mt19937_64 rng(2024);
  TreeEncoding t;
  t.k = 0;
  t.root = t.add_node(0, std::nullopt);
  int l = t.add_node(0, std::nullopt);
  int r = t.add_node(0, std::nullopt);
  t.nodes[t.root].left = l;
  t.nodes[t.root].right = r;
  t.nodes[l].parent = t.root;
  t.nodes[r].parent = t.root;

  for (int round = 0; round < 150; round++) {
    TableSatwa a;
    int n_states = 2 + static_cast<int>(rng() % 3);
    a.strata.assign(n_states, 0);
    for (int q = 1; q < n_states; q++)
      a.strata[q] = a.strata[q - 1] + static_cast<int>(rng() % 2);
    a.initial = n_states - 1;
    auto random_formula = [&](int q) {
      std::vector<FormulaPtr> leaves;
      for (int q2 = 0; q2 <= q; q2++) {
        if (rng() % 2) leaves.push_back(f_lit(q2));
        if (a.strata[q2] < a.strata[q] && rng() % 3 == 0)
          leaves.push_back(f_nlit(q2));
      }
      if (rng() % 4 == 0) leaves.push_back(f_true());
      if (leaves.empty()) return rng() % 2 ? f_true() : f_false();
      std::shuffle(leaves.begin(), leaves.end(), rng);
      if (leaves.size() == 1) return leaves[0];
      size_t split = 1 + rng() % (leaves.size());
      std::vector<FormulaPtr> left(leaves.begin(), leaves.begin() + split);
      std::vector<FormulaPtr> right(leaves.begin() + split, leaves.end());
      FormulaPtr lf = rng() % 2 ? f_and(left) : f_or(left);
      if (right.empty()) return lf;
      FormulaPtr rf = rng() % 2 ? f_and(right) : f_or(right);
      return rng() % 2 ? f_and({lf, rf}) : f_or({lf, rf});
    };
    for (int q = 0; q < n_states; q++)
      for (int ann = 0; ann < 2; ann++)
        a.table[{q, ann == 1}] = random_formula(q);

    auto prov = build_provenance(a, t);
    validate_stratification(prov.circuit, prov.circuit.attached_strat);
    for (uint32_t mask = 0; mask < 8; mask++) {
      std::vector<char> ann(3, 0);
      GateValuation v(prov.circuit.num_gates(), 0);
      for (int b = 0; b < 3; b++) {
        ann[b] = mask >> b & 1;
        v[prov.node_input_gate[b]] = ann[b];
      }
      CHECK(eval_stratified(prov.circuit, v).value ==
            satwa_run_exists(a, t, ann));
    }
  }
}

TEST_CASE("cycluit JSON round trip") {
  std::mt19937_64 rng(5);
  Cycluit c = random_stratified_cycluit(rng, 25);
  c.set_label(0, "first input");
  std::string json = export_cycluit_json(c);
  Cycluit back = import_cycluit_json(json);
  CHECK(back.num_gates() == c.num_gates());
  CHECK(back.num_wires() == c.num_wires());
  CHECK(back.output() == c.output());
  CHECK(export_cycluit_json(back) == json);
}

TEST_CASE("dot export names gate shapes") {
  Cycluit c;
  int x = c.add_gate(GateType::Input);
  int n = c.add_gate(GateType::Not);
  c.add_wire(x, n);
  c.set_output(n);
  std::string dot = export_cycluit_dot(c);
  CHECK(dot.find("shape=box") != std::string::npos);
  CHECK(dot.find("invtriangle") != std::string::npos);
  CHECK(dot.find("g0 -> g1") != std::string::npos);
}

TEST_CASE("linear evaluation scales to a long OR chain") {
  Cycluit c;
  int x = c.add_gate(GateType::Input);
  int prev = x;
  for (int j = 0; j < 100000; j++) {
    int g = c.add_gate(GateType::Or);
    c.add_wire(prev, g);
    prev = g;
  }
  c.set_output(prev);
  GateValuation v(c.num_gates(), 0);
  v[x] = 1;
  auto s = eval_monotone_linear(c, v);
  CHECK(s[prev]);
}
