#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cfgd/cycluit.hpp"
#include "cfgd/datalog.hpp"
#include "cfgd/frontends.hpp"
#include "cfgd/oracle.hpp"
#include "cfgd/relational.hpp"
#include "cfgd/satwa.hpp"
#include "cfgd/treewidth.hpp"

namespace cfgd::testing {

// ---------- fixtures ----------

inline const char* kTable1 =
    "R(3,7). R(3,4). R(5,4). R(2,5). R(9,10). R(7,8).\n"
    "S(3,7). S(7,9). S(11,9). S(2,6).\n"
    "T(1,2,3).\n";

inline Instance table1_instance() {
  std::string text;
  for (const char* f :
       {"R(3,7)", "R(3,4)", "R(5,4)", "R(2,5)", "R(9,10)", "R(7,8)",
        "S(3,7)", "S(7,9)", "S(11,9)", "S(2,6)", "T(1,2,3)"})
    text += std::string(f) + ".\n";
  return parse_instance(text);
}

// A width-2 tree decomposition of the Table 1 instance in the style of the
// paper's figure: one bag per fact cluster, rooted at the T-fact bag.
inline TreeDecomposition table1_decomposition(const Instance& i) {
  auto e = [&](const char* name) { return i.element_id(name); };
  TreeDecomposition td;
  int b0 = td.add_bag({e("1"), e("2"), e("3")}, -1);
  int b1 = td.add_bag({e("2"), e("3"), e("5")}, b0);
  td.add_bag({e("3"), e("4"), e("5")}, b1);
  td.add_bag({e("2"), e("6")}, b0);
  int b4 = td.add_bag({e("3"), e("7")}, b0);
  int b5 = td.add_bag({e("7"), e("9")}, b4);
  td.add_bag({e("7"), e("8")}, b4);
  td.add_bag({e("9"), e("10")}, b5);
  td.add_bag({e("9"), e("11")}, b5);
  return td;
}

// Example 2.2: directed-reachability complement, not CFG.
inline const char* kTransitiveProgram =
    "T(X,Y) :- R(X,Y).\n"
    "T(X,Y) :- R(X,Z), T(Z,Y).\n"
    "Goal() :- not T(X,Y).\n";

// Example 4.2: P', the CFG^GN variant over {R, A, B}.
inline const char* kReachComplementProgram =
    "T(X) :- A(X).\n"
    "T(Y) :- T(X), R(X,Y).\n"
    "Goal() :- A(X), B(Y), not T(Y).\n";

inline Instance chain_instance(int n, const std::string& rel = "R") {
  Instance i;
  i.sig().declare(rel, 2);
  for (int j = 0; j < n; j++)
    i.add_fact(rel, {"c" + std::to_string(j), "c" + std::to_string(j + 1)});
  return i;
}

inline TreeDecomposition chain_decomposition(const Instance& i, int n) {
  TreeDecomposition td;
  int prev = -1;
  for (int j = 0; j < n; j++) {
    int a = i.element_id("c" + std::to_string(j));
    int b = i.element_id("c" + std::to_string(j + 1));
    prev = td.add_bag({a, b}, prev);
  }
  return td;
}

// ---------- exact treewidth (subset DP over elimination orders) ----------

inline int exact_treewidth(const PrimalGraph& g) {
  int n = g.n;
  if (n == 0) return 0;
  if (n > 18) throw ValidationError("exact_treewidth: too many vertices");
  // q(S, v): vertices outside S u {v} reachable from v via S.
  auto q = [&](uint32_t s, int v) {
    std::vector<char> seen(n, 0);
    std::deque<int> queue{v};
    seen[v] = 1;
    int count = 0;
    std::vector<char> counted(n, 0);
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int w : g.adj[u]) {
        if (seen[w]) continue;
        if (s >> w & 1) {
          seen[w] = 1;
          queue.push_back(w);
        } else if (!counted[w] && w != v) {
          counted[w] = 1;
          count++;
        }
      }
    }
    return count;
  };
  std::vector<int> f(1u << n, 0);
  for (uint32_t s = 1; s < (1u << n); s++) {
    f[s] = n;
    for (int v = 0; v < n; v++) {
      if (!(s >> v & 1)) continue;
      uint32_t without = s & ~(1u << v);
      f[s] = std::min(f[s], std::max(f[without], q(without, v)));
    }
  }
  return f[(1u << n) - 1];
}

// ---------- CQ homomorphism oracle ----------

inline bool cq_holds(const ConjunctiveQuery& q, const Instance& i) {
  std::vector<int> relmap(q.sig.size(), -1);
  for (int r = 0; r < q.sig.size(); r++) {
    int ir = i.sig().id_of(q.sig.name(r));
    if (ir >= 0 && i.sig().arity(ir) != q.sig.arity(r)) return false;
    relmap[r] = ir;
  }
  std::vector<std::vector<const Fact*>> by_rel(q.sig.size());
  for (const auto& f : i.facts())
    for (int r = 0; r < q.sig.size(); r++)
      if (relmap[r] == f.rel) by_rel[r].push_back(&f);
  std::vector<int> asg(q.num_vars(), -1);
  std::function<bool(size_t)> go = [&](size_t ai) {
    if (ai == q.atoms.size()) return true;
    const RuleAtom& a = q.atoms[ai];
    for (const Fact* f : by_rel[a.rel]) {
      std::vector<int> bound;
      bool ok = true;
      for (size_t p = 0; p < a.vars.size() && ok; p++) {
        int v = a.vars[p];
        if (asg[v] < 0) {
          asg[v] = f->args[p];
          bound.push_back(v);
        } else if (asg[v] != f->args[p]) {
          ok = false;
        }
      }
      if (ok && go(ai + 1)) return true;
      for (int v : bound) asg[v] = -1;
    }
    return false;
  };
  return go(0);
}

// ---------- regex matching oracles ----------

// Substring matcher against the regex AST (explores all splits; words <= 6).
inline bool regex_matches(const RegexNode& node,
                          const std::vector<RpqLetter>& word, int lo, int hi) {
  switch (node.kind) {
    case RegexNode::Letter:
      return hi == lo + 1 && word[lo] == node.letter;
    case RegexNode::Epsilon:
      return lo == hi;
    case RegexNode::Concat:
      for (int mid = lo; mid <= hi; mid++)
        if (regex_matches(*node.kids[0], word, lo, mid) &&
            regex_matches(*node.kids[1], word, mid, hi))
          return true;
      return false;
    case RegexNode::Union:
      return regex_matches(*node.kids[0], word, lo, hi) ||
             regex_matches(*node.kids[1], word, lo, hi);
    case RegexNode::Star:
      if (lo == hi) return true;
      for (int mid = lo + 1; mid <= hi; mid++)
        if (regex_matches(*node.kids[0], word, lo, mid) &&
            regex_matches(node, word, mid, hi))
          return true;
      return false;
  }
  return false;
}

inline bool nfa_accepts_word(const Nfa& a, const std::vector<RpqLetter>& word) {
  std::vector<std::vector<std::pair<int, const RpqLetter*>>> out(a.num_states);
  for (const auto& e : a.edges)
    out[e.from].push_back({e.to, e.letter ? &*e.letter : nullptr});
  auto closure = [&](std::set<int> s) {
    std::deque<int> queue(s.begin(), s.end());
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (auto [v, l] : out[u])
        if (!l && !s.count(v)) {
          s.insert(v);
          queue.push_back(v);
        }
    }
    return s;
  };
  std::set<int> cur = closure({a.initial});
  for (const auto& letter : word) {
    std::set<int> next;
    for (int u : cur)
      for (auto [v, l] : out[u])
        if (l && *l == letter) next.insert(v);
    cur = closure(next);
    if (cur.empty()) return false;
  }
  return cur.count(a.final) > 0;
}

// ---------- 2RPQ / SAC2RPQ oracles (product reachability) ----------

// reach[u][v] = path u -> v with label in L(nfa), over binary facts of i.
inline std::vector<std::vector<char>> rpq_reach(const Nfa& nfa,
                                                const Instance& i) {
  auto dom = i.active_domain();
  int nd = i.num_elements();
  std::vector<std::vector<char>> reach(nd, std::vector<char>(nd, 0));
  for (int u : dom) {
    // BFS over (element, state).
    std::vector<std::vector<char>> seen(nd,
                                        std::vector<char>(nfa.num_states, 0));
    std::deque<std::pair<int, int>> queue{{u, nfa.initial}};
    seen[u][nfa.initial] = 1;
    while (!queue.empty()) {
      auto [e, s] = queue.front();
      queue.pop_front();
      if (s == nfa.final) reach[u][e] = 1;
      for (const auto& edge : nfa.edges) {
        if (edge.from != s) continue;
        if (!edge.letter) {
          if (!seen[e][edge.to]) {
            seen[e][edge.to] = 1;
            queue.push_back({e, edge.to});
          }
          continue;
        }
        int rel = i.sig().id_of(edge.letter->rel);
        if (rel < 0) continue;
        for (const auto& f : i.facts()) {
          if (f.rel != rel) continue;
          int from = edge.letter->reversed ? f.args[1] : f.args[0];
          int to = edge.letter->reversed ? f.args[0] : f.args[1];
          if (from == e && !seen[to][edge.to]) {
            seen[to][edge.to] = 1;
            queue.push_back({to, edge.to});
          }
        }
      }
    }
  }
  return reach;
}

inline bool rpq_holds(const RegularPathQuery& q, const Instance& i) {
  auto reach = rpq_reach(thompson(q), i);
  for (const auto& row : reach)
    for (char c : row)
      if (c) return true;
  return false;
}

inline bool sac2rpq_holds(const Sac2Rpq& q, const Instance& i) {
  auto dom = i.active_domain();
  if (dom.empty()) return false;
  std::map<std::string, int> var_id;
  for (const auto& v : q.vars) var_id.emplace(v, var_id.size());
  int n = static_cast<int>(var_id.size());
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (size_t ei = 0; ei < q.edges.size(); ei++) {
    int a = var_id.at(q.edges[ei].from), b = var_id.at(q.edges[ei].to);
    adj[a].push_back({b, static_cast<int>(ei)});
    adj[b].push_back({a, static_cast<int>(ei)});
  }
  std::vector<char> visited(n, 0);
  // sat(v): elements e such that the component subtree rooted at v matches.
  std::function<std::set<int>(int, int)> sat = [&](int v,
                                                   int parent) -> std::set<int> {
    visited[v] = 1;
    std::set<int> out(dom.begin(), dom.end());
    for (auto [w, ei] : adj[v]) {
      if (w == parent) continue;
      auto child = sat(w, v);
      const auto& e = q.edges[ei];
      Nfa nfa = thompson(e.rpq);
      auto reach = rpq_reach(nfa, i);
      std::set<int> ok;
      bool v_is_from = var_id.at(e.from) == v;
      for (int ev : out)
        for (int ew : child)
          if ((v_is_from && reach[ev][ew]) || (!v_is_from && reach[ew][ev])) {
            ok.insert(ev);
            break;
          }
      out = std::move(ok);
    }
    return out;
  };
  for (const auto& [name, v] : var_id) {
    if (visited[v]) continue;
    if (sat(v, -1).empty()) return false;
  }
  return true;
}

// ---------- GNF direct FO evaluation ----------

inline bool gnf_holds_phi(const GnfPhi& phi, const Instance& i,
                          std::map<std::string, int>& asg);

inline bool gnf_holds_psi(const GnfPsi& psi, const Instance& i,
                          std::map<std::string, int>& asg) {
  int rel = i.sig().id_of(psi.atom.rel);
  Fact f;
  if (rel >= 0) {
    f.rel = rel;
    for (const auto& v : psi.atom.vars) f.args.push_back(asg.at(v));
  }
  bool guard_ok = rel >= 0 && i.has_fact(f);
  switch (psi.kind) {
    case GnfPsi::Atom:
      return guard_ok;
    case GnfPsi::Guarded:
      return guard_ok && gnf_holds_phi(*psi.sub, i, asg);
    case GnfPsi::NGuarded:
      return guard_ok && !gnf_holds_phi(*psi.sub, i, asg);
  }
  return false;
}

inline bool gnf_holds_phi(const GnfPhi& phi, const Instance& i,
                          std::map<std::string, int>& asg) {
  auto dom = i.active_domain();
  for (const auto& d : phi.disjuncts) {
    // Existential bindings shadow outer ones; work on a copy so the outer
    // assignment survives regardless of the outcome.
    std::map<std::string, int> local = asg;
    std::function<bool(size_t)> assign = [&](size_t vi) -> bool {
      if (vi == d.exists.size()) {
        for (const auto& c : d.conjuncts)
          if (!gnf_holds_psi(c, i, local)) return false;
        return true;
      }
      for (int e : dom) {
        local[d.exists[vi]] = e;
        if (assign(vi + 1)) return true;
      }
      return false;
    };
    if (assign(0)) return true;
  }
  return false;
}

inline bool gnf_holds(const GnfPhi& phi, const Instance& i) {
  std::map<std::string, int> asg;
  return gnf_holds_phi(phi, i, asg);
}

// ---------- direct SATWA run-existence oracle ----------
// Least-fixpoint computation of run existence per stratum, straight from
// the run definition; independent of the provenance-cycluit path.

inline bool satwa_run_exists(AnnotatedSatwa& a, const TreeEncoding& t,
                             const std::vector<char>& ann) {
  int n = static_cast<int>(t.nodes.size());
  auto neigh = [&](int w) {
    std::vector<int> out{w};
    if (t.nodes[w].parent >= 0) out.push_back(t.nodes[w].parent);
    if (t.nodes[w].left >= 0) out.push_back(t.nodes[w].left);
    if (t.nodes[w].right >= 0) out.push_back(t.nodes[w].right);
    return out;
  };
  // Discover all (state, node) pairs reachable through formulas.
  std::map<std::pair<int, int>, char> val;
  std::deque<std::pair<int, int>> queue{{a.initial_state(), t.root}};
  val[{a.initial_state(), t.root}] = 0;
  std::vector<std::pair<int, int>> pairs;
  while (!queue.empty()) {
    auto [q, w] = queue.front();
    queue.pop_front();
    pairs.push_back({q, w});
    FormulaPtr f = a.delta(q, label_of(t, w), ann[w]);
    std::function<void(const Formula&)> scan = [&](const Formula& node) {
      if (node.kind == Formula::Lit) {
        for (int wn : neigh(w))
          if (!val.count({node.state, wn})) {
            val[{node.state, wn}] = 0;
            queue.push_back({node.state, wn});
          }
      } else if (node.kind == Formula::NLit) {
        if (!val.count({node.state, w})) {
          val[{node.state, w}] = 0;
          queue.push_back({node.state, w});
        }
      }
      for (const auto& k : node.kids) scan(*k);
    };
    scan(*f);
  }
  int max_strat = 0;
  for (const auto& [qw, v] : val) max_strat = std::max(max_strat, a.stratum(qw.first));
  std::function<bool(const Formula&, int)> eval = [&](const Formula& f,
                                                      int w) -> bool {
    switch (f.kind) {
      case Formula::True:
        return true;
      case Formula::False:
        return false;
      case Formula::Lit: {
        for (int wn : neigh(w))
          if (val[{f.state, wn}]) return true;
        return false;
      }
      case Formula::NLit:
        return !val[{f.state, w}];
      case Formula::And:
        for (const auto& k : f.kids)
          if (!eval(*k, w)) return false;
        return true;
      case Formula::Or:
        for (const auto& k : f.kids)
          if (eval(*k, w)) return true;
        return false;
    }
    return false;
  };
  for (int s = 0; s <= max_strat; s++) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [q, w] : pairs) {
        if (a.stratum(q) != s || val[{q, w}]) continue;
        if (eval(*a.delta(q, label_of(t, w), ann[w]), w)) {
          val[{q, w}] = 1;
          changed = true;
        }
      }
    }
  }
  return val[{a.initial_state(), t.root}];
}

// ---------- random cycluit generator ----------

inline Cycluit random_monotone_cycluit(std::mt19937_64& rng, int max_gates) {
  int n = 2 + static_cast<int>(rng() % (max_gates - 1));
  Cycluit c;
  int n_inputs = 1 + static_cast<int>(rng() % std::max(1, n / 3));
  for (int i = 0; i < n_inputs; i++) c.add_gate(GateType::Input);
  for (int i = n_inputs; i < n; i++)
    c.add_gate(rng() % 2 ? GateType::And : GateType::Or);
  for (int g = n_inputs; g < n; g++) {
    int fanin = static_cast<int>(rng() % 4);
    for (int e = 0; e < fanin; e++)
      c.add_wire(static_cast<int>(rng() % n), g);  // cycles allowed
  }
  c.set_output(static_cast<int>(rng() % n));
  return c;
}

// Random stratified cycluit: layered gates, NOT gates only across layers.
inline Cycluit random_stratified_cycluit(std::mt19937_64& rng, int max_gates) {
  int n = 3 + static_cast<int>(rng() % (max_gates - 2));
  Cycluit c;
  int n_inputs = 1 + static_cast<int>(rng() % std::max(1, n / 3));
  std::vector<int> layer(n, 0);
  for (int i = 0; i < n_inputs; i++) c.add_gate(GateType::Input);
  int n_layers = 1 + static_cast<int>(rng() % 3);
  for (int g = n_inputs; g < n; g++) {
    layer[g] = 1 + static_cast<int>(rng() % n_layers);
    int r = static_cast<int>(rng() % 5);
    c.add_gate(r == 0 ? GateType::Not
                      : (r % 2 ? GateType::And : GateType::Or));
  }
  for (int g = n_inputs; g < n; g++) {
    if (c.type(g) == GateType::Not) {
      // Single input from a strictly lower layer (inputs count as layer 0).
      std::vector<int> pool;
      for (int h = 0; h < n; h++)
        if (layer[h] < layer[g]) pool.push_back(h);
      c.add_wire(pool[rng() % pool.size()], g);
    } else {
      int fanin = static_cast<int>(rng() % 4);
      for (int e = 0; e < fanin; e++) {
        // Same or lower layer keeps the stratification valid.
        std::vector<int> pool;
        for (int h = 0; h < n; h++)
          if (layer[h] <= layer[g]) pool.push_back(h);
        c.add_wire(pool[rng() % pool.size()], g);
      }
    }
  }
  c.set_output(static_cast<int>(rng() % n));
  return c;
}

}  // namespace cfgd::testing
