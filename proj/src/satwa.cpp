#include "cfgd/satwa.hpp"

#include <algorithm>
#include <cassert>
#include <cstdio>
#include <functional>
#include <sstream>

#include "cfgd/cycluit.hpp"
#include "json.hpp"

namespace cfgd {

Label label_of(const TreeEncoding& e, int node) {
  return Label{e.nodes[node].d, e.nodes[node].fact};
}

int64_t Formula::size() const {
  int64_t s = 1;
  for (const auto& k : kids) s += k->size();
  return s;
}

namespace {
FormulaPtr make(Formula::Kind kind, int state, std::vector<FormulaPtr> kids) {
  auto f = std::make_shared<Formula>();
  f->kind = kind;
  f->state = state;
  f->kids = std::move(kids);
  return f;
}
}  // namespace

FormulaPtr f_true() {
  static FormulaPtr t = make(Formula::True, -1, {});
  return t;
}
FormulaPtr f_false() {
  static FormulaPtr f = make(Formula::False, -1, {});
  return f;
}
FormulaPtr f_lit(int state) { return make(Formula::Lit, state, {}); }
FormulaPtr f_nlit(int state) { return make(Formula::NLit, state, {}); }

FormulaPtr f_and(std::vector<FormulaPtr> kids) {
  std::vector<FormulaPtr> keep;
  for (auto& k : kids) {
    if (k->kind == Formula::False) return f_false();
    if (k->kind == Formula::True) continue;
    keep.push_back(std::move(k));
  }
  if (keep.empty()) return f_true();
  if (keep.size() == 1) return keep[0];
  return make(Formula::And, -1, std::move(keep));
}

FormulaPtr f_or(std::vector<FormulaPtr> kids) {
  std::vector<FormulaPtr> keep;
  for (auto& k : kids) {
    if (k->kind == Formula::True) return f_true();
    if (k->kind == Formula::False) continue;
    keep.push_back(std::move(k));
  }
  if (keep.empty()) return f_false();
  if (keep.size() == 1) return keep[0];
  return make(Formula::Or, -1, std::move(keep));
}

std::string formula_to_string(const Formula& f,
                              const std::function<std::string(int)>& name) {
  switch (f.kind) {
    case Formula::True:
      return "true";
    case Formula::False:
      return "false";
    case Formula::Lit:
      return name(f.state);
    case Formula::NLit:
      return "!" + name(f.state);
    case Formula::And:
    case Formula::Or: {
      std::string sep = f.kind == Formula::And ? " & " : " | ";
      std::string out = "(";
      for (size_t i = 0; i < f.kids.size(); i++) {
        if (i) out += sep;
        out += formula_to_string(*f.kids[i], name);
      }
      return out + ")";
    }
  }
  return "?";
}

std::optional<PartialValuation> hom(const std::vector<int>& y,
                                    const std::vector<int>& x,
                                    const PartialValuation& nu, int num_vars) {
  assert(y.size() == x.size());
  PartialValuation out;
  out.val.assign(num_vars, PartialValuation::kUndef);
  for (size_t i = 0; i < y.size(); i++) {
    uint8_t v = nu.val[x[i]];
    assert(v != PartialValuation::kUndef);
    if (out.val[y[i]] != PartialValuation::kUndef && out.val[y[i]] != v)
      return std::nullopt;
    out.val[y[i]] = v;
  }
  return out;
}

namespace {

struct StateKey {
  // ExtAtom/IntAtom: occurrence states q_{S(x)}^nu keyed by (rule, literal);
  // RuleState: q_r^{nu,A} with A a literal subset mask; IntCap: q_{R(a)}.
  enum Kind : uint8_t { ExtAtom, IntAtom, RuleState, IntCap } kind;
  int32_t rule = -1;    // ExtAtom/IntAtom/RuleState
  int32_t aux = -1;     // literal index, or relation id for IntCap
  uint32_t subset = 0;  // RuleState only
  std::vector<uint8_t> val;  // valuation (rule states/atoms) or tuple (IntCap)

  friend bool operator==(const StateKey&, const StateKey&) = default;
};

struct StateKeyHash {
  size_t operator()(const StateKey& k) const {
    size_t h = k.kind * 1000003u + k.rule * 10007u + k.aux * 101u + k.subset;
    for (uint8_t v : k.val) h = h * 1099511628211ull + v + 1;
    return h;
  }
};

struct LabelKey {
  uint32_t d;
  int32_t rel;  // -1 when no fact
  std::vector<uint8_t> args;
  friend bool operator==(const LabelKey&, const LabelKey&) = default;
};

struct LabelKeyHash {
  size_t operator()(const LabelKey& k) const {
    size_t h = k.d * 1000003u + (k.rel + 7);
    for (uint8_t v : k.args) h = h * 1099511628211ull + v + 1;
    return h;
  }
};

}  // namespace

struct CompiledSatwa::Impl {
  Program p;
  int k = 0;
  int dk = 0;
  StrataAssignment strata;
  std::vector<std::vector<int>> rules_by_head;
  std::vector<std::vector<std::vector<int>>> lit_vars;  // distinct, sorted

  std::vector<StateKey> states;
  std::unordered_map<StateKey, int, StateKeyHash> state_ids;
  std::vector<int> state_strat;
  int initial = -1;

  std::unordered_map<LabelKey, int, LabelKeyHash> label_ids;
  std::unordered_map<uint64_t, FormulaPtr> memo;
  int64_t formula_size_total = 0;

  int intern_state(StateKey key, int strat) {
    auto it = state_ids.find(key);
    if (it != state_ids.end()) return it->second;
    int id = static_cast<int>(states.size());
    states.push_back(key);
    state_ids.emplace(std::move(key), id);
    state_strat.push_back(strat);
    return id;
  }

  int label_id(const Label& l) {
    LabelKey key{l.d, l.fact ? l.fact->rel : -1,
                 l.fact ? l.fact->args : std::vector<uint8_t>{}};
    auto [it, fresh] =
        label_ids.emplace(std::move(key), static_cast<int>(label_ids.size()));
    return it->second;
  }

  // ----- state constructors -----

  int ext_atom_state(int rule, int lit, const PartialValuation& nu) {
    return intern_state(StateKey{StateKey::ExtAtom, rule, lit, 0, nu.val}, 0);
  }
  int int_atom_state(int rule, int lit, const PartialValuation& nu) {
    int rel = p.rules[rule].body[lit].atom.rel;
    return intern_state(StateKey{StateKey::IntAtom, rule, lit, 0, nu.val},
                        strata.strat[rel]);
  }
  int rule_state(int rule, uint32_t subset, const PartialValuation& nu) {
    PartialValuation restricted;
    restricted.val.assign(nu.val.size(), PartialValuation::kUndef);
    for (int li = 0; li < static_cast<int>(p.rules[rule].body.size()); li++)
      if (subset >> li & 1)
        for (int v : lit_vars[rule][li]) restricted.val[v] = nu.val[v];
    return intern_state(
        StateKey{StateKey::RuleState, rule, -1, subset, restricted.val},
        strata.strat[p.rules[rule].head.rel]);
  }
  int cap_state(int rel, std::vector<uint8_t> tuple) {
    return intern_state(StateKey{StateKey::IntCap, -1, rel, 0, std::move(tuple)},
                        strata.strat[rel]);
  }

  // ----- transitions -----

  static bool in_d(uint32_t d, uint8_t a) { return d >> a & 1; }

  std::vector<uint8_t> d_members(uint32_t d) const {
    std::vector<uint8_t> out;
    for (int a = 0; a < dk; a++)
      if (d >> a & 1) out.push_back(static_cast<uint8_t>(a));
    return out;
  }

  FormulaPtr delta_atom(int q, const StateKey& key, const Label& l,
                        bool extensional) {
    int rule = key.rule, lit = key.aux;
    const RuleAtom& atom = p.rules[rule].body[lit].atom;
    const auto& dvars = lit_vars[rule][lit];
    PartialValuation nu{key.val};
    for (int v : dvars)
      if (nu.defined(v) && !in_d(l.d, nu.val[v])) return f_false();
    std::vector<int> undef;
    for (int v : dvars)
      if (!nu.defined(v)) undef.push_back(v);
    if (!undef.empty()) {
      std::vector<FormulaPtr> disj{f_lit(q)};
      for (int v : undef)
        for (uint8_t a : d_members(l.d)) {
          PartialValuation ext = nu;
          ext.val[v] = a;
          disj.push_back(f_lit(extensional ? ext_atom_state(rule, lit, ext)
                                           : int_atom_state(rule, lit, ext)));
        }
      return f_or(std::move(disj));
    }
    if (!extensional) {
      std::vector<uint8_t> tuple;
      for (int v : atom.vars) tuple.push_back(nu.val[v]);
      return f_lit(cap_state(atom.rel, std::move(tuple)));
    }
    if (l.fact && l.fact->rel == atom.rel) {
      bool match = true;
      for (size_t i = 0; i < atom.vars.size() && match; i++)
        match = l.fact->args[i] == nu.val[atom.vars[i]];
      if (match) return f_true();
    }
    return f_lit(q);
  }

  FormulaPtr delta_cap(const StateKey& key, const Label& l) {
    int rel = key.aux;
    for (uint8_t a : key.val)
      if (!in_d(l.d, a)) return f_false();
    std::vector<FormulaPtr> disj;
    for (int ri : rules_by_head[rel]) {
      const Rule& r = p.rules[ri];
      // The unique valuation nu' with nu'(head vars) = tuple, if repeats
      // are consistent.
      PartialValuation nu;
      nu.val.assign(r.num_vars(), PartialValuation::kUndef);
      bool ok = true;
      for (size_t i = 0; i < r.head.vars.size() && ok; i++) {
        int v = r.head.vars[i];
        uint8_t a = key.val[i];
        if (nu.val[v] != PartialValuation::kUndef && nu.val[v] != a)
          ok = false;
        nu.val[v] = a;
      }
      if (!ok) continue;
      uint32_t all = (1u << r.body.size()) - 1;
      disj.push_back(f_lit(rule_state(ri, all, nu)));
    }
    return f_or(std::move(disj));
  }

  FormulaPtr delta_rule(int q, const StateKey& key, const Label& l) {
    int ri = key.rule;
    const Rule& r = p.rules[ri];
    uint32_t subset = key.subset;
    PartialValuation nu{key.val};

    std::vector<int> svars;  // distinct vars of the subset
    {
      std::vector<char> seen(r.num_vars(), 0);
      for (int li = 0; li < static_cast<int>(r.body.size()); li++)
        if (subset >> li & 1)
          for (int v : lit_vars[ri][li])
            if (!seen[v]) {
              seen[v] = 1;
              svars.push_back(v);
            }
      std::sort(svars.begin(), svars.end());
    }
    for (int v : svars)
      if (nu.defined(v) && !in_d(l.d, nu.val[v])) return f_false();

    int nlits = __builtin_popcount(subset);
    if (nlits >= 2) {
      std::vector<FormulaPtr> disj{f_lit(q)};
      int lowest = __builtin_ctz(subset);
      // Enumerate unordered partitions (A1, A2): A1 keeps the lowest literal.
      for (uint32_t a1 = (subset - 1) & subset; a1 > 0;
           a1 = (a1 - 1) & subset) {
        if (!(a1 >> lowest & 1)) continue;
        uint32_t a2 = subset & ~a1;
        // Shared undefined variables get a total valuation over d.
        std::vector<char> in1(r.num_vars(), 0);
        for (int li = 0; li < static_cast<int>(r.body.size()); li++)
          if (a1 >> li & 1)
            for (int v : lit_vars[ri][li]) in1[v] = 1;
        std::vector<int> shared;
        {
          std::vector<char> in2(r.num_vars(), 0);
          for (int li = 0; li < static_cast<int>(r.body.size()); li++)
            if (a2 >> li & 1)
              for (int v : lit_vars[ri][li]) in2[v] = 1;
          for (int v = 0; v < r.num_vars(); v++)
            if (in1[v] && in2[v] && !nu.defined(v)) shared.push_back(v);
        }
        auto members = d_members(l.d);
        std::vector<size_t> idx(shared.size(), 0);
        if (!shared.empty() && members.empty()) continue;
        for (;;) {
          PartialValuation ext = nu;
          for (size_t i = 0; i < shared.size(); i++)
            ext.val[shared[i]] = members[idx[i]];
          disj.push_back(f_and({f_lit(rule_state(ri, a1, ext)),
                                f_lit(rule_state(ri, a2, ext))}));
          if (shared.empty()) break;
          size_t i = 0;
          while (i < shared.size() && ++idx[i] == members.size()) {
            idx[i] = 0;
            i++;
          }
          if (i == shared.size()) break;
        }
      }
      return f_or(std::move(disj));
    }

    // Singleton subset.
    int li = __builtin_ctz(subset);
    const RuleLiteral& lit = r.body[li];
    PartialValuation restricted;
    restricted.val.assign(r.num_vars(), PartialValuation::kUndef);
    for (int v : lit_vars[ri][li]) restricted.val[v] = nu.val[v];
    bool total = true;
    for (int v : lit_vars[ri][li]) total = total && nu.defined(v);

    if (lit.positive) {
      if (!p.is_intensional(lit.atom.rel))
        return f_lit(ext_atom_state(ri, li, restricted));
      if (!total) return f_lit(int_atom_state(ri, li, restricted));
      std::vector<uint8_t> tuple;
      for (int v : lit.atom.vars) tuple.push_back(nu.val[v]);
      return f_lit(cap_state(lit.atom.rel, std::move(tuple)));
    }
    if (!total) {
      // Guess values for the undefined variables of the negated literal,
      // one at a time (the unary case of the construction, generalized to
      // tuples whose distinct variables are unguarded, e.g. repeats).
      std::vector<FormulaPtr> disj{f_lit(q)};
      for (int v : lit_vars[ri][li]) {
        if (nu.defined(v)) continue;
        for (uint8_t a : d_members(l.d)) {
          PartialValuation ext = nu;
          ext.val[v] = a;
          disj.push_back(f_lit(rule_state(ri, subset, ext)));
        }
      }
      return f_or(std::move(disj));
    }
    std::vector<uint8_t> tuple;
    for (int v : lit.atom.vars) tuple.push_back(nu.val[v]);
    return f_nlit(cap_state(lit.atom.rel, std::move(tuple)));
  }

  // Only a total extensional-atom state reads the label's fact; all other
  // transitions depend on the domain alone. Canonicalizing their label to
  // the fact-free one shares the memo entry (and the downstream circuit)
  // across both annotations of a lifted automaton.
  bool reads_fact(const StateKey& key) const {
    if (key.kind != StateKey::ExtAtom) return false;
    for (int v : lit_vars[key.rule][key.aux])
      if (key.val[v] == PartialValuation::kUndef) return false;
    return true;
  }

  FormulaPtr delta(int q, const Label& l_in) {
    const StateKey key = states[q];  // copy: states may reallocate below
    Label l = l_in;
    if (l.fact && (l.fact->rel < 0 || !reads_fact(key))) l.fact.reset();
    uint64_t mkey = static_cast<uint64_t>(q) << 24 | label_id(l);
    auto it = memo.find(mkey);
    if (it != memo.end()) return it->second;
    FormulaPtr f;
    switch (key.kind) {
      case StateKey::ExtAtom:
        f = delta_atom(q, key, l, true);
        break;
      case StateKey::IntAtom:
        f = delta_atom(q, key, l, false);
        break;
      case StateKey::RuleState:
        f = delta_rule(q, key, l);
        break;
      case StateKey::IntCap:
        f = delta_cap(key, l);
        break;
    }
    formula_size_total += f->size();
    memo.emplace(mkey, f);
    return f;
  }

  std::string state_name(int q) const {
    const StateKey& key = states[q];
    auto valstr = [&](const std::vector<uint8_t>& val, const Rule& r) {
      std::string s = "{";
      bool first = true;
      for (size_t v = 0; v < val.size(); v++) {
        if (val[v] == PartialValuation::kUndef) continue;
        if (!first) s += ",";
        first = false;
        s += r.var_names[v] + "=" + TreeEncoding::dk_name(val[v]);
      }
      return s + "}";
    };
    auto atomstr = [&](const RuleAtom& a, const Rule& r) {
      std::string s = p.rels.name(a.rel) + "(";
      for (size_t i = 0; i < a.vars.size(); i++) {
        if (i) s += ",";
        s += r.var_names[a.vars[i]];
      }
      return s + ")";
    };
    std::ostringstream o;
    switch (key.kind) {
      case StateKey::ExtAtom:
      case StateKey::IntAtom: {
        const Rule& r = p.rules[key.rule];
        o << "q[" << atomstr(r.body[key.aux].atom, r) << "]"
          << valstr(key.val, r) << "@r" << key.rule;
        break;
      }
      case StateKey::RuleState: {
        const Rule& r = p.rules[key.rule];
        o << "q[r" << key.rule << "|";
        bool first = true;
        for (int li = 0; li < static_cast<int>(r.body.size()); li++) {
          if (!(key.subset >> li & 1)) continue;
          if (!first) o << ",";
          first = false;
          if (!r.body[li].positive) o << "!";
          o << atomstr(r.body[li].atom, r);
        }
        o << "]" << valstr(key.val, r);
        break;
      }
      case StateKey::IntCap: {
        o << "q[" << p.rels.name(key.aux) << "(";
        for (size_t i = 0; i < key.val.size(); i++) {
          if (i) o << ",";
          o << TreeEncoding::dk_name(key.val[i]);
        }
        o << ")]";
        break;
      }
    }
    return o.str();
  }
};

std::unique_ptr<CompiledSatwa> compile(const Program& p, int k_inst) {
  if (!check_cfg(p).pass)
    throw NotGuardedError("program is not clique-frontier-guarded");
  if (!check_gn(p).pass)
    throw NotGuardedError(
        "program has unguarded intensional negation (not CFG^GN)");
  auto impl = std::make_unique<CompiledSatwa::Impl>();
  impl->p = p;
  impl->k = k_inst;
  impl->dk = 2 * k_inst + 2;
  if (impl->dk > 30) throw ValidationError("k too large (max 14)");
  impl->strata = stratify(p);
  if (body_size(p) > 12)
    std::fprintf(stderr,
                 "warning: body size %d exceeds 12; the automaton state "
                 "space is exponential in it\n",
                 body_size(p));
  impl->rules_by_head.resize(p.rels.size());
  for (int ri = 0; ri < static_cast<int>(p.rules.size()); ri++)
    impl->rules_by_head[p.rules[ri].head.rel].push_back(ri);
  impl->lit_vars.resize(p.rules.size());
  for (size_t ri = 0; ri < p.rules.size(); ri++) {
    impl->lit_vars[ri].resize(p.rules[ri].body.size());
    for (size_t li = 0; li < p.rules[ri].body.size(); li++) {
      auto vars = p.rules[ri].body[li].atom.vars;
      std::sort(vars.begin(), vars.end());
      vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
      impl->lit_vars[ri][li] = std::move(vars);
    }
    if (p.rules[ri].body.size() > 31)
      throw ValidationError("rule body too large");
  }
  impl->initial = impl->cap_state(p.goal_rel, {});
  return std::unique_ptr<CompiledSatwa>(new CompiledSatwa(std::move(impl)));
}

CompiledSatwa::CompiledSatwa(std::unique_ptr<Impl> impl)
    : impl_(std::move(impl)) {}
CompiledSatwa::~CompiledSatwa() = default;

int CompiledSatwa::initial_state() { return impl_->initial; }
int CompiledSatwa::num_states() const {
  return static_cast<int>(impl_->states.size());
}
int CompiledSatwa::stratum(int q) const { return impl_->state_strat[q]; }
FormulaPtr CompiledSatwa::delta(int q, const Label& l) {
  return impl_->delta(q, l);
}
std::string CompiledSatwa::state_name(int q) const {
  return impl_->state_name(q);
}
const Program& CompiledSatwa::program() const { return impl_->p; }
int CompiledSatwa::k_inst() const { return impl_->k; }
int64_t CompiledSatwa::measured_size() const {
  return static_cast<int64_t>(impl_->states.size()) +
         impl_->formula_size_total;
}

std::vector<Label> CompiledSatwa::enumerate_alphabet() const {
  Signature ext = impl_->p.extensional_signature();
  int dk = impl_->dk;
  std::vector<Label> out;
  for (uint32_t d = 0; d < (1u << dk); d++) {
    if (__builtin_popcount(d) > impl_->k + 1) continue;
    out.push_back(Label{d, std::nullopt});
    std::vector<uint8_t> members;
    for (int a = 0; a < dk; a++)
      if (d >> a & 1) members.push_back(static_cast<uint8_t>(a));
    for (int r = 0; r < ext.size(); r++) {
      int pr = impl_->p.rels.id_of(ext.name(r));
      int ar = ext.arity(r);
      std::vector<size_t> idx(ar, 0);
      if (members.empty()) continue;
      for (;;) {
        EncFact f;
        f.rel = pr;
        for (int i = 0; i < ar; i++) f.args.push_back(members[idx[i]]);
        out.push_back(Label{d, std::move(f)});
        int i = 0;
        while (i < ar && ++idx[i] == members.size()) {
          idx[i] = 0;
          i++;
        }
        if (i == ar) break;
      }
    }
  }
  return out;
}

void CompiledSatwa::eager_instantiate() {
  auto alphabet = enumerate_alphabet();
  size_t done = 0;
  while (done < impl_->states.size()) {
    int q = static_cast<int>(done++);
    for (const auto& l : alphabet) delta(q, l);
  }
}

std::string CompiledSatwa::export_json() {
  eager_instantiate();
  auto alphabet = enumerate_alphabet();
  nlohmann::json jstates = nlohmann::json::array();
  for (int q = 0; q < num_states(); q++)
    jstates.push_back({{"id", q},
                       {"name", state_name(q)},
                       {"stratum", stratum(q)}});
  std::function<nlohmann::json(const Formula&)> jform =
      [&](const Formula& f) -> nlohmann::json {
    switch (f.kind) {
      case Formula::True:
        return nlohmann::json::array({"true"});
      case Formula::False:
        return nlohmann::json::array({"false"});
      case Formula::Lit:
        return nlohmann::json::array({"lit", state_name(f.state)});
      case Formula::NLit:
        return nlohmann::json::array({"nlit", state_name(f.state)});
      case Formula::And:
      case Formula::Or: {
        nlohmann::json arr = nlohmann::json::array();
        arr.push_back(f.kind == Formula::And ? "and" : "or");
        for (const auto& k : f.kids) arr.push_back(jform(*k));
        return arr;
      }
    }
    return nlohmann::json::array({"false"});
  };
  auto label_str = [&](const Label& l) {
    std::string s = "({";
    bool first = true;
    for (int a = 0; a < impl_->dk; a++) {
      if (!(l.d >> a & 1)) continue;
      if (!first) s += ",";
      first = false;
      s += TreeEncoding::dk_name(a);
    }
    s += "},";
    if (l.fact) {
      s += impl_->p.rels.name(l.fact->rel) + "(";
      for (size_t i = 0; i < l.fact->args.size(); i++) {
        if (i) s += ",";
        s += TreeEncoding::dk_name(l.fact->args[i]);
      }
      s += ")";
    }
    return s + ")";
  };
  nlohmann::json jtrans = nlohmann::json::array();
  for (int q = 0; q < num_states(); q++)
    for (const auto& l : alphabet) {
      FormulaPtr f = delta(q, l);
      if (f->kind == Formula::False) continue;  // default
      jtrans.push_back(nlohmann::json::array(
          {state_name(q), label_str(l), jform(*f)}));
    }
  nlohmann::json j = {{"initial", state_name(impl_->initial)},
                      {"k", impl_->k},
                      {"states", jstates},
                      {"transitions", jtrans}};
  return j.dump(2);
}

TreeEncoding align_encoding(const TreeEncoding& e, const Program& p) {
  TreeEncoding out = e;
  for (auto& node : out.nodes) {
    if (!node.fact) continue;
    if (node.fact->rel < 0 || node.fact->rel >= e.sig.size())
      throw ValidationError(
          "alphabet-mismatch: encoding fact relation out of range (was the "
          "encoding aligned twice?)");
    int rel = p.rels.id_of(e.sig.name(node.fact->rel));
    if (rel >= 0 && p.rels.arity(rel) !=
                        static_cast<int>(node.fact->args.size()))
      throw ValidationError("alphabet-mismatch: relation " +
                            e.sig.name(node.fact->rel) +
                            " has a different arity in the program");
    node.fact->rel = rel >= 0 ? rel : -2;
  }
  return out;
}

bool satwa_accepts(Satwa& a, const TreeEncoding& t) {
  LiftedSatwa lifted(a);
  ProvenanceCircuit prov = build_provenance(lifted, t);
  GateValuation ones(prov.circuit.num_gates(), 1);
  return eval_stratified(prov.circuit, ones).value;
}

bool satwa_accepts(CompiledSatwa& a, const TreeEncoding& t) {
  TreeEncoding aligned = align_encoding(t, a.program());
  return satwa_accepts(static_cast<Satwa&>(a), aligned);
}

}  // namespace cfgd
