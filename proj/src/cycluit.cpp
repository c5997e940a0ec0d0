#include "cfgd/cycluit.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <deque>
#include <sstream>

#include "json.hpp"

namespace cfgd {

int Cycluit::add_gate(GateType t) {
  types_.push_back(t);
  return static_cast<int>(types_.size()) - 1;
}

void Cycluit::set_type(int g, GateType t) { types_[g] = t; }

void Cycluit::add_wire(int src, int dst) {
  if (frozen_) {
    // Unfreeze: rebuild the editable wire list from the CSR. Gates added
    // after the freeze are not in the CSR yet.
    int frozen_gates = static_cast<int>(in_off_.size()) - 1;
    wires_.reserve(in_src_.size());
    for (int g = 0; g < frozen_gates; g++) {
      int deg;
      const int32_t* in = inputs_of(g, &deg);
      for (int i = 0; i < deg; i++) wires_.push_back({in[i], g});
    }
    in_off_.clear();
    out_off_.clear();
    in_src_.clear();
    out_dst_.clear();
    frozen_ = false;
  }
  wires_.push_back({src, dst});
}

int64_t Cycluit::num_wires() const {
  return frozen_ ? static_cast<int64_t>(in_src_.size())
                 : static_cast<int64_t>(wires_.size());
}

std::vector<int> Cycluit::input_gates() const {
  std::vector<int> out;
  for (int g = 0; g < num_gates(); g++)
    if (types_[g] == GateType::Input) out.push_back(g);
  return out;
}

void Cycluit::freeze() const {
  if (frozen_) return;
  int n = num_gates();
  in_off_.assign(n + 1, 0);
  out_off_.assign(n + 1, 0);
  for (const auto& [src, dst] : wires_) {
    in_off_[dst + 1]++;
    out_off_[src + 1]++;
  }
  for (int g = 0; g < n; g++) {
    in_off_[g + 1] += in_off_[g];
    out_off_[g + 1] += out_off_[g];
  }
  in_src_.resize(wires_.size());
  out_dst_.resize(wires_.size());
  std::vector<int64_t> ipos(in_off_.begin(), in_off_.end() - 1);
  std::vector<int64_t> opos(out_off_.begin(), out_off_.end() - 1);
  for (const auto& [src, dst] : wires_) {
    in_src_[ipos[dst]++] = src;
    out_dst_[opos[src]++] = dst;
  }
  wires_.clear();
  wires_.shrink_to_fit();
  frozen_ = true;
}

const int32_t* Cycluit::inputs_of(int g, int* n) const {
  *n = static_cast<int>(in_off_[g + 1] - in_off_[g]);
  return in_src_.data() + in_off_[g];
}

const int32_t* Cycluit::outputs_of(int g, int* n) const {
  *n = static_cast<int>(out_off_[g + 1] - out_off_[g]);
  return out_dst_.data() + out_off_[g];
}

int Cycluit::fanin(int g) const {
  return static_cast<int>(in_off_[g + 1] - in_off_[g]);
}

int Cycluit::not_input(int g) const {
  assert(types_[g] == GateType::Not && fanin(g) == 1);
  return in_src_[in_off_[g]];
}

namespace {

void require_monotone(const Cycluit& c) {
  for (int g = 0; g < c.num_gates(); g++)
    if (c.type(g) == GateType::Not)
      throw NotMonotoneError("cycluit contains a NOT gate (gate " +
                             std::to_string(g) + ")");
}

void check_valuation(const Cycluit& c, const GateValuation& v) {
  if (static_cast<int>(v.size()) != c.num_gates())
    throw ValidationError("valuation size does not match gate count");
}

}  // namespace

GateValuation eval_monotone_naive(const Cycluit& c, const GateValuation& v) {
  require_monotone(c);
  check_valuation(c, v);
  c.freeze();
  int n = c.num_gates();
  GateValuation s(n, 0);
  for (int g = 0; g < n; g++)
    if (c.type(g) == GateType::Input && v[g]) s[g] = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int g = 0; g < n; g++) {
      if (s[g] || c.type(g) == GateType::Input) continue;
      int deg;
      const int32_t* in = c.inputs_of(g, &deg);
      bool val;
      if (c.type(g) == GateType::Or) {
        val = false;
        for (int i = 0; i < deg; i++) val = val || s[in[i]];
      } else {
        val = true;
        for (int i = 0; i < deg; i++) val = val && s[in[i]];
      }
      if (val) {
        s[g] = 1;
        changed = true;
      }
    }
  }
  return s;
}

GateValuation eval_monotone_linear(const Cycluit& c, const GateValuation& v) {
  require_monotone(c);
  check_valuation(c, v);
  c.freeze();
  int n = c.num_gates();
  std::vector<int32_t> m(n, 0);
  for (int g = 0; g < n; g++)
    if (c.type(g) == GateType::And) m[g] = c.fanin(g);
  std::vector<int32_t> stack;
  for (int g = 0; g < n; g++)
    if (c.type(g) == GateType::Input && v[g]) stack.push_back(g);
  for (int g = 0; g < n; g++)
    if (c.type(g) == GateType::And && m[g] == 0) stack.push_back(g);
  GateValuation s(n, 0);
  while (!stack.empty()) {
    int g = stack.back();
    stack.pop_back();
    if (s[g]) continue;
    s[g] = 1;
    int deg;
    const int32_t* out = c.outputs_of(g, &deg);
    for (int i = 0; i < deg; i++) {
      int h = out[i];
      if (c.type(h) == GateType::Or) {
        stack.push_back(h);
      } else if (c.type(h) == GateType::And) {
        if (--m[h] == 0) stack.push_back(h);
      }
    }
  }
  return s;
}

namespace {

// Iterative Tarjan over the wire digraph.
struct TarjanResult {
  std::vector<int32_t> comp;  // gate -> scc id, reverse topological
  int ncomps = 0;
};

TarjanResult tarjan_sccs(const Cycluit& c) {
  int n = c.num_gates();
  TarjanResult res;
  res.comp.assign(n, -1);
  std::vector<int32_t> index(n, -1), low(n, 0), stck;
  std::vector<char> on_stack(n, 0);
  std::vector<std::pair<int32_t, int32_t>> dfs;  // (gate, next child index)
  int counter = 0;
  for (int start = 0; start < n; start++) {
    if (index[start] >= 0) continue;
    dfs.push_back({start, 0});
    while (!dfs.empty()) {
      auto& [g, ci] = dfs.back();
      if (ci == 0) {
        index[g] = low[g] = counter++;
        stck.push_back(g);
        on_stack[g] = 1;
      }
      int deg;
      const int32_t* out = c.outputs_of(g, &deg);
      bool descended = false;
      while (ci < deg) {
        int h = out[ci++];
        if (index[h] < 0) {
          dfs.push_back({h, 0});
          descended = true;
          break;
        }
        if (on_stack[h]) low[g] = std::min(low[g], index[h]);
      }
      if (descended) continue;
      if (low[g] == index[g]) {
        for (;;) {
          int w = stck.back();
          stck.pop_back();
          on_stack[w] = 0;
          res.comp[w] = res.ncomps;
          if (w == g) break;
        }
        res.ncomps++;
      }
      int gg = g;
      dfs.pop_back();
      if (!dfs.empty()) low[dfs.back().first] = std::min(low[dfs.back().first], low[gg]);
    }
  }
  return res;
}

// A shortest cycle through gate `through` (a NOT gate in its own SCC).
std::vector<int> witness_cycle(const Cycluit& c, const TarjanResult& t,
                               int through) {
  std::vector<int32_t> prev(c.num_gates(), -2);
  std::deque<int> queue{through};
  prev[through] = -1;
  while (!queue.empty()) {
    int g = queue.front();
    queue.pop_front();
    int deg;
    const int32_t* out = c.outputs_of(g, &deg);
    for (int i = 0; i < deg; i++) {
      int h = out[i];
      if (t.comp[h] != t.comp[through]) continue;
      if (h == through) {
        std::vector<int> cycle{through};
        for (int x = g; x != -1; x = prev[x]) cycle.push_back(x);
        std::reverse(cycle.begin(), cycle.end());
        cycle.pop_back();  // drop the duplicated start
        std::reverse(cycle.begin(), cycle.end());
        return cycle;
      }
      if (prev[h] == -2) {
        prev[h] = g;
        queue.push_back(h);
      }
    }
  }
  return {through};
}

}  // namespace

std::vector<int> stratify_cycluit(const Cycluit& c) {
  c.freeze();
  int n = c.num_gates();
  TarjanResult t = tarjan_sccs(c);
  // Reject cycles through NOT gates.
  std::vector<int32_t> comp_size(t.ncomps, 0);
  for (int g = 0; g < n; g++) comp_size[t.comp[g]]++;
  for (int g = 0; g < n; g++) {
    if (c.type(g) != GateType::Not) continue;
    int in = c.not_input(g);
    bool cyclic = t.comp[in] == t.comp[g] &&
                  (comp_size[t.comp[g]] > 1 || in == g);
    if (cyclic) {
      auto cycle = witness_cycle(c, t, g);
      std::string msg = "negation cycle through gates";
      for (int x : cycle) msg += " " + std::to_string(x);
      throw NegationCycleError(msg, cycle);
    }
  }
  // Tarjan numbers SCCs sinks-first, so reversing gives a topological
  // order; input gates are pushed to stratum 0.
  std::vector<int> strat(n, 0);
  for (int g = 0; g < n; g++) strat[g] = t.ncomps - 1 - t.comp[g] + 1;
  for (int g = 0; g < n; g++)
    if (c.type(g) == GateType::Input) strat[g] = 0;
  // Compact to a dense range.
  std::vector<int> used(strat.begin(), strat.end());
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  std::unordered_map<int, int> rank;
  bool has_zero = !used.empty() && used[0] == 0;
  for (size_t i = 0; i < used.size(); i++)
    rank[used[i]] = static_cast<int>(i) + (has_zero ? 0 : 1);
  for (int g = 0; g < n; g++) strat[g] = rank[strat[g]];
  validate_stratification(c, strat);
  return strat;
}

void validate_stratification(const Cycluit& c, const std::vector<int>& strat) {
  c.freeze();
  if (static_cast<int>(strat.size()) != c.num_gates())
    throw ValidationError("stratification size mismatch");
  for (int g = 0; g < c.num_gates(); g++) {
    if ((strat[g] == 0) != (c.type(g) == GateType::Input))
      throw ValidationError("stratum 0 must be exactly the input gates");
    int deg;
    const int32_t* in = c.inputs_of(g, &deg);
    if (c.type(g) == GateType::Input && deg > 0)
      throw ValidationError("input gate with incoming wires");
    if (c.type(g) == GateType::Not && deg != 1)
      throw ValidationError("NOT gate must have exactly one input");
    for (int i = 0; i < deg; i++) {
      if (strat[in[i]] > strat[g] ||
          (c.type(g) == GateType::Not && strat[in[i]] >= strat[g]))
        throw ValidationError("stratification violated on wire " +
                              std::to_string(in[i]) + " -> " +
                              std::to_string(g));
    }
  }
}

StratifiedEvalResult eval_stratified(const Cycluit& c, const GateValuation& v,
                                     const std::vector<int>* strat_override) {
  check_valuation(c, v);
  c.freeze();
  std::vector<int> computed;
  const std::vector<int>* strat = nullptr;
  if (!c.attached_strat.empty()) {
    strat = &c.attached_strat;
  } else if (strat_override) {
    strat = strat_override;
  } else {
    computed = stratify_cycluit(c);
    strat = &computed;
  }
  int n = c.num_gates();
  int max_strat = 0;
  for (int s : *strat) max_strat = std::max(max_strat, s);

  // Gates per stratum (only NOT gates need stratum-ordered treatment).
  std::vector<std::vector<int32_t>> nots(max_strat + 1);
  for (int g = 0; g < n; g++)
    if (c.type(g) == GateType::Not) nots[(*strat)[g]].push_back(g);

  std::vector<int32_t> m(n, 0);
  for (int g = 0; g < n; g++)
    if (c.type(g) == GateType::And) m[g] = c.fanin(g);

  GateValuation s(n, 0);
  std::vector<int32_t> stack;
  auto drain = [&]() {
    while (!stack.empty()) {
      int g = stack.back();
      stack.pop_back();
      if (s[g]) continue;
      s[g] = 1;
      int deg;
      const int32_t* out = c.outputs_of(g, &deg);
      for (int i = 0; i < deg; i++) {
        int h = out[i];
        if (c.type(h) == GateType::Or) {
          stack.push_back(h);
        } else if (c.type(h) == GateType::And) {
          if (--m[h] == 0) stack.push_back(h);
        }
      }
    }
  };

  for (int g = 0; g < n; g++)
    if (c.type(g) == GateType::Input && v[g]) stack.push_back(g);
  for (int g = 0; g < n; g++)
    if (c.type(g) == GateType::And && m[g] == 0) stack.push_back(g);
  drain();
  for (int st = 1; st <= max_strat; st++) {
    for (int g : nots[st])
      if (!s[c.not_input(g)]) stack.push_back(g);
    drain();
  }

  StratifiedEvalResult res;
  res.full = std::move(s);
  res.value = c.output() >= 0 && res.full[c.output()];
  return res;
}

namespace {

constexpr int kFalse = -1;
constexpr int kTrue = -2;

struct ProvBuilder {
  AnnotatedSatwa& a;
  const TreeEncoding& t;
  ProvenanceCircuit out;
  std::vector<int> strat;
  std::vector<Label> labels;
  std::vector<std::array<int32_t, 4>> neigh;  // self, parent, left, right
  // Dense per-state node arrays: gate of g_w^q (kFalse for dead pairs),
  // shared neighbor-OR gates and shared NOT gates. -3 marks "not built".
  std::vector<std::vector<int32_t>> state_gate;
  std::vector<std::vector<int32_t>> or_cache;
  std::unordered_map<uint64_t, int32_t> not_cache;
  std::vector<int32_t> notin;
  int true_gate = -1, false_gate = -1;
  std::deque<std::array<int32_t, 2>> pending;  // (state, node)

  explicit ProvBuilder(AnnotatedSatwa& a, const TreeEncoding& t) : a(a), t(t) {}

  static uint64_t key(int q, int w) {
    return static_cast<uint64_t>(q) << 32 | static_cast<uint32_t>(w);
  }

  int32_t& slot(std::vector<std::vector<int32_t>>& cache, int q, int w) {
    if (static_cast<int>(cache.size()) <= q) cache.resize(q + 1);
    if (cache[q].empty()) cache[q].assign(t.nodes.size(), -3);
    return cache[q][w];
  }

  int add(GateType type, int st) {
    int g = out.circuit.add_gate(type);
    strat.push_back(st);
    return g;
  }

  int ensure_true() {
    if (true_gate < 0) true_gate = add(GateType::And, 1);
    return true_gate;
  }
  int ensure_false() {
    if (false_gate < 0) false_gate = add(GateType::Or, 1);
    return false_gate;
  }
  int ensure_notin(int w) {
    if (notin[w] < 0) {
      notin[w] = add(GateType::Not, 1);
      out.circuit.add_wire(out.node_input_gate[w], notin[w]);
    }
    return notin[w];
  }

  // Gate g_w^q, or kFalse when both transition formulas are constant false.
  int gate_of(int q, int w) {
    int32_t& cell = slot(state_gate, q, w);
    if (cell != -3) return cell;
    FormulaPtr f1 = a.delta(q, labels[w], true);
    FormulaPtr f0 = a.delta(q, labels[w], false);
    int g;
    if (f1->kind == Formula::False && f0->kind == Formula::False) {
      g = kFalse;
    } else {
      g = add(GateType::Or, a.stratum(q) + 1);
      out.live_pairs++;
      pending.push_back({q, w});
    }
    // `slot` may have reallocated if delta created states; re-resolve.
    slot(state_gate, q, w) = g;
    return g;
  }

  // Circuit for a transition formula at node w, in the stratum of the
  // state whose transition is being converted. Returns a gate id, kTrue,
  // or kFalse.
  int circuit_of(const Formula& f, int w, int ctx_strat) {
    switch (f.kind) {
      case Formula::True:
        return kTrue;
      case Formula::False:
        return kFalse;
      case Formula::Lit: {
        {
          int32_t cached = slot(or_cache, f.state, w);
          if (cached != -3) return cached;
        }
        int members[4];
        int n_members = 0;
        for (int wn : neigh[w]) {
          if (wn < 0) continue;
          int g = gate_of(f.state, wn);
          if (g != kFalse) members[n_members++] = g;
        }
        int res;
        if (n_members == 0) {
          res = kFalse;
        } else if (n_members == 1) {
          res = members[0];
        } else {
          res = add(GateType::Or, a.stratum(f.state) + 1);
          for (int i = 0; i < n_members; i++)
            out.circuit.add_wire(members[i], res);
        }
        slot(or_cache, f.state, w) = res;
        return res;
      }
      case Formula::NLit: {
        auto it = not_cache.find(key(f.state, w));
        if (it != not_cache.end()) return it->second;
        // (kept as a hash map: negative literals are rare)
        int base = gate_of(f.state, w);
        int res;
        if (base == kFalse) {
          res = kTrue;
        } else {
          res = add(GateType::Not, a.stratum(f.state) + 2);
          out.circuit.add_wire(base, res);
        }
        not_cache.emplace(key(f.state, w), res);
        return res;
      }
      case Formula::And:
      case Formula::Or: {
        bool is_and = f.kind == Formula::And;
        std::vector<int> kids;
        for (const auto& k : f.kids) {
          int g = circuit_of(*k, w, ctx_strat);
          if (g == (is_and ? kFalse : kTrue)) return g;  // annihilator
          if (g == (is_and ? kTrue : kFalse)) continue;  // identity
          kids.push_back(g);
        }
        if (kids.empty()) return is_and ? kTrue : kFalse;
        if (kids.size() == 1) return kids[0];
        int res = add(is_and ? GateType::And : GateType::Or, ctx_strat);
        for (int g : kids) out.circuit.add_wire(g, res);
        return res;
      }
    }
    return kFalse;
  }

  void wire(int q, int w) {
    int g = slot(state_gate, q, w);
    assert(g >= 0);
    FormulaPtr f1 = a.delta(q, labels[w], true);
    FormulaPtr f0 = a.delta(q, labels[w], false);
    int ctx = a.stratum(q) + 1;
    if (f1 == f0) {
      int cg = circuit_of(*f1, w, ctx);
      if (cg == kTrue)
        out.circuit.add_wire(ensure_true(), g);
      else if (cg != kFalse)
        out.circuit.add_wire(cg, g);
      return;
    }
    int c1 = circuit_of(*f1, w, ctx);
    int c0 = circuit_of(*f0, w, ctx);
    if (c1 != kFalse) {
      if (c1 == kTrue) {
        out.circuit.add_wire(out.node_input_gate[w], g);
      } else {
        int b = add(GateType::And, ctx);
        out.circuit.add_wire(out.node_input_gate[w], b);
        out.circuit.add_wire(c1, b);
        out.circuit.add_wire(b, g);
      }
    }
    if (c0 != kFalse) {
      if (c0 == kTrue) {
        out.circuit.add_wire(ensure_notin(w), g);
      } else {
        int b = add(GateType::And, ctx);
        out.circuit.add_wire(ensure_notin(w), b);
        out.circuit.add_wire(c0, b);
        out.circuit.add_wire(b, g);
      }
    }
  }

  void run() {
    int n = static_cast<int>(t.nodes.size());
    labels.resize(n);
    neigh.resize(n);
    notin.assign(n, -1);
    out.node_input_gate.resize(n);
    for (int w = 0; w < n; w++) {
      out.node_input_gate[w] = add(GateType::Input, 0);
      labels[w] = label_of(t, w);
      neigh[w] = {static_cast<int32_t>(w), t.nodes[w].parent, t.nodes[w].left,
                  t.nodes[w].right};
    }
    int root_gate = gate_of(a.initial_state(), t.root);
    while (!pending.empty()) {
      auto [q, w] = pending.front();
      pending.pop_front();
      wire(q, w);
    }
    if (root_gate == kFalse) root_gate = ensure_false();
    out.circuit.set_output(root_gate);
    out.circuit.attached_strat = std::move(strat);
  }
};

}  // namespace

ProvenanceCircuit build_provenance(AnnotatedSatwa& a, const TreeEncoding& t) {
  if (t.root < 0) throw ValidationError("empty tree");
  ProvBuilder b(a, t);
  b.run();
  return std::move(b.out);
}

namespace {

const char* type_name(GateType t) {
  switch (t) {
    case GateType::Input:
      return "inp";
    case GateType::And:
      return "and";
    case GateType::Or:
      return "or";
    case GateType::Not:
      return "not";
  }
  return "?";
}

}  // namespace

std::string export_cycluit_json(const Cycluit& c) {
  c.freeze();
  nlohmann::json gates = nlohmann::json::array();
  for (int g = 0; g < c.num_gates(); g++) {
    int deg;
    const int32_t* in = c.inputs_of(g, &deg);
    std::vector<int> inputs(in, in + deg);
    std::sort(inputs.begin(), inputs.end());
    nlohmann::json jg = {
        {"id", g}, {"type", type_name(c.type(g))}, {"inputs", inputs}};
    auto it = c.labels().find(g);
    if (it != c.labels().end()) jg["label"] = it->second;
    gates.push_back(std::move(jg));
  }
  nlohmann::json j = {{"gates", gates}, {"output", c.output()}};
  return j.dump(2);
}

std::string export_cycluit_dot(const Cycluit& c) {
  c.freeze();
  std::ostringstream o;
  o << "digraph cycluit {\n";
  for (int g = 0; g < c.num_gates(); g++) {
    const char* shape = "ellipse";
    switch (c.type(g)) {
      case GateType::Input:
        shape = "box";
        break;
      case GateType::And:
        shape = "house";
        break;
      case GateType::Or:
        shape = "ellipse";
        break;
      case GateType::Not:
        shape = "invtriangle";
        break;
    }
    std::string label = type_name(c.type(g));
    auto it = c.labels().find(g);
    if (it != c.labels().end()) label += ":" + it->second;
    o << "  g" << g << " [shape=" << shape << ",label=\"" << label << "\"";
    if (g == c.output()) o << ",penwidth=3";
    o << "];\n";
  }
  for (int g = 0; g < c.num_gates(); g++) {
    int deg;
    const int32_t* in = c.inputs_of(g, &deg);
    for (int i = 0; i < deg; i++)
      o << "  g" << in[i] << " -> g" << g << ";\n";
  }
  o << "}\n";
  return o.str();
}

Cycluit import_cycluit_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Cycluit c;
  for (const auto& jg : j.at("gates")) {
    std::string ty = jg.at("type");
    GateType t;
    if (ty == "inp")
      t = GateType::Input;
    else if (ty == "and")
      t = GateType::And;
    else if (ty == "or")
      t = GateType::Or;
    else if (ty == "not")
      t = GateType::Not;
    else
      throw ValidationError("unknown gate type " + ty);
    int id = c.add_gate(t);
    if (jg.at("id").get<int>() != id)
      throw ValidationError("gate ids must be dense and sorted");
    if (jg.contains("label")) c.set_label(id, jg.at("label").get<std::string>());
  }
  for (const auto& jg : j.at("gates"))
    for (int src : jg.at("inputs"))
      c.add_wire(src, jg.at("id").get<int>());
  c.set_output(j.at("output").get<int>());
  return c;
}

}  // namespace cfgd
