#include "cfgd/datalog.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <map>
#include <sstream>

namespace cfgd {

std::vector<int> Program::rules_with_head(int rel) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(rules.size()); i++)
    if (rules[i].head.rel == rel) out.push_back(i);
  return out;
}

Signature Program::extensional_signature() const {
  Signature sig;
  for (int r = 0; r < rels.size(); r++)
    if (!intensional[r]) sig.declare(rels.name(r), rels.arity(r));
  return sig;
}

void Program::check_well_formed() const {
  for (size_t ri = 0; ri < rules.size(); ri++) {
    const Rule& r = rules[ri];
    if (r.body.empty()) throw ValidationError("rule has empty body");
    std::vector<char> in_body(r.num_vars(), 0);
    for (const auto& lit : r.body) {
      for (int v : lit.atom.vars) in_body[v] = 1;
      if (!lit.positive && !intensional[lit.atom.rel])
        throw ValidationError("negated extensional atom " +
                              rels.name(lit.atom.rel) + " in rule " +
                              std::to_string(ri));
    }
    for (int v : r.head.vars)
      if (!in_body[v])
        throw ValidationError("head variable " + r.var_names[v] +
                              " does not occur in the body of rule " +
                              std::to_string(ri));
    if (!intensional[r.head.rel])
      throw ValidationError("extensional relation in head");
  }
  if (goal_rel < 0) throw ValidationError("program has no Goal rule");
  if (rels.arity(goal_rel) != 0)
    throw ValidationError("Goal must have arity 0");
}

namespace {

struct Token {
  enum Kind { Ident, LParen, RParen, Comma, Implies, Dot, Not, End } kind;
  std::string text;
  int line, col;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) {}
  Token next() {
    skip();
    int line = line_, col = col_;
    if (pos_ >= s_.size()) return {Token::End, "", line, col};
    char c = s_[pos_];
    if (c == '(') return take(Token::LParen, 1, line, col);
    if (c == ')') return take(Token::RParen, 1, line, col);
    if (c == ',') return take(Token::Comma, 1, line, col);
    if (c == '.') return take(Token::Dot, 1, line, col);
    if (c == ':' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '-')
      return take(Token::Implies, 2, line, col);
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
              s_[pos_] == '_'))
        advance();
      std::string text = s_.substr(start, pos_ - start);
      if (text == "not") return {Token::Not, text, line, col};
      return {Token::Ident, text, line, col};
    }
    throw ParseError(line, col, std::string("unexpected character '") + c + "'");
  }

 private:
  void skip() {
    for (;;) {
      while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
        advance();
      if (pos_ < s_.size() && s_[pos_] == '%') {
        while (pos_ < s_.size() && s_[pos_] != '\n') advance();
        continue;
      }
      break;
    }
  }
  Token take(Token::Kind k, int len, int line, int col) {
    std::string text = s_.substr(pos_, len);
    for (int i = 0; i < len; i++) advance();
    return {k, text, line, col};
  }
  void advance() {
    if (s_[pos_] == '\n') {
      line_++;
      col_ = 1;
    } else {
      col_++;
    }
    pos_++;
  }
  const std::string& s_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

struct RawAtom {
  std::string rel;
  std::vector<std::string> vars;
  int line, col;
};

struct RawRule {
  RawAtom head;
  std::vector<std::pair<bool, RawAtom>> body;
};

bool is_variable(const std::string& s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

}  // namespace

Program parse_program(const std::string& text) {
  Lexer lex(text);
  Token tok = lex.next();
  std::vector<RawRule> raw;

  auto parse_atom = [&]() {
    if (tok.kind != Token::Ident)
      throw ParseError(tok.line, tok.col, "expected relation name");
    RawAtom a{tok.text, {}, tok.line, tok.col};
    tok = lex.next();
    if (tok.kind != Token::LParen)
      throw ParseError(tok.line, tok.col, "expected '('");
    tok = lex.next();
    while (tok.kind != Token::RParen) {
      if (tok.kind != Token::Ident)
        throw ParseError(tok.line, tok.col, "expected variable");
      if (!is_variable(tok.text))
        throw ParseError(tok.line, tok.col,
                         "constants are not allowed; variables are "
                         "uppercase-initial (got '" + tok.text + "')");
      a.vars.push_back(tok.text);
      tok = lex.next();
      if (tok.kind == Token::Comma) tok = lex.next();
    }
    tok = lex.next();
    return a;
  };

  while (tok.kind != Token::End) {
    RawRule r;
    r.head = parse_atom();
    if (tok.kind != Token::Implies)
      throw ParseError(tok.line, tok.col, "expected ':-'");
    tok = lex.next();
    for (;;) {
      bool positive = true;
      if (tok.kind == Token::Not) {
        positive = false;
        tok = lex.next();
      }
      r.body.push_back({positive, parse_atom()});
      if (tok.kind == Token::Comma) {
        tok = lex.next();
        continue;
      }
      break;
    }
    if (tok.kind != Token::Dot)
      throw ParseError(tok.line, tok.col, "expected '.' at end of rule");
    tok = lex.next();
    raw.push_back(std::move(r));
  }

  Program p;
  std::set<std::string> head_rels;
  for (const auto& r : raw) head_rels.insert(r.head.rel);

  auto declare = [&](const RawAtom& a) {
    bool intens = head_rels.count(a.rel) > 0;
    if (a.rel == "Goal" && !a.vars.empty())
      throw ParseError(a.line, a.col, "Goal must have arity 0");
    int id;
    try {
      id = p.rels.declare(a.rel, static_cast<int>(a.vars.size()),
                          /*zero_ary_ok=*/intens);
    } catch (const ValidationError& e) {
      throw ParseError(a.line, a.col, e.what());
    }
    if (static_cast<int>(p.intensional.size()) <= id)
      p.intensional.resize(id + 1, 0);
    p.intensional[id] = p.intensional[id] || intens;
    return id;
  };

  for (const auto& rr : raw) {
    Rule rule;
    std::map<std::string, int> var_ids;
    auto var_of = [&](const std::string& name) {
      auto it = var_ids.find(name);
      if (it != var_ids.end()) return it->second;
      int id = static_cast<int>(rule.var_names.size());
      rule.var_names.push_back(name);
      var_ids[name] = id;
      return id;
    };
    rule.head.rel = declare(rr.head);
    for (const auto& v : rr.head.vars) rule.head.vars.push_back(var_of(v));
    for (const auto& [positive, atom] : rr.body) {
      RuleLiteral lit;
      lit.positive = positive;
      lit.atom.rel = declare(atom);
      if (!positive && !head_rels.count(atom.rel))
        throw ParseError(atom.line, atom.col,
                         "negation is only allowed on intensional relations "
                         "(got " + atom.rel + ")");
      for (const auto& v : atom.vars) lit.atom.vars.push_back(var_of(v));
      rule.body.push_back(std::move(lit));
    }
    p.rules.push_back(std::move(rule));
  }
  p.intensional.resize(p.rels.size(), 0);
  p.goal_rel = p.rels.id_of("Goal");
  p.check_well_formed();
  return p;
}

std::string serialize_program(const Program& p) {
  std::ostringstream out;
  auto atom = [&](const RuleAtom& a, const Rule& r) {
    out << p.rels.name(a.rel) << "(";
    for (size_t i = 0; i < a.vars.size(); i++) {
      if (i) out << ",";
      out << r.var_names[a.vars[i]];
    }
    out << ")";
  };
  for (const auto& r : p.rules) {
    atom(r.head, r);
    out << " :- ";
    for (size_t i = 0; i < r.body.size(); i++) {
      if (i) out << ", ";
      if (!r.body[i].positive) out << "not ";
      atom(r.body[i].atom, r);
    }
    out << ".\n";
  }
  return out.str();
}

namespace {

// Tarjan SCC over the intensional dependency graph.
struct SccState {
  std::vector<std::vector<std::pair<int, bool>>> succ;  // (rel, negative)
  std::vector<int> index, low, comp;
  std::vector<char> on_stack;
  std::vector<int> stack;
  int counter = 0, ncomps = 0;

  void dfs(int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = 1;
    for (auto [w, neg] : succ[v]) {
      if (index[w] < 0) {
        dfs(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      for (;;) {
        int w = stack.back();
        stack.pop_back();
        on_stack[w] = 0;
        comp[w] = ncomps;
        if (w == v) break;
      }
      ncomps++;
    }
  }
};

}  // namespace

StrataAssignment stratify(const Program& p) {
  int n = p.rels.size();
  SccState scc;
  scc.succ.resize(n);
  scc.index.assign(n, -1);
  scc.low.assign(n, 0);
  scc.comp.assign(n, -1);
  scc.on_stack.assign(n, 0);
  for (const auto& r : p.rules)
    for (const auto& lit : r.body)
      if (p.is_intensional(lit.atom.rel))
        scc.succ[lit.atom.rel].push_back({r.head.rel, !lit.positive});
  for (int v = 0; v < n; v++)
    if (p.is_intensional(v) && scc.index[v] < 0) scc.dfs(v);

  // Tarjan emits components sinks-first, so component id order is a
  // topological order of the condensation when edges go dep -> head.
  // Recompute strata along edges, erroring on internal negative edges.
  std::vector<int> comp_strat(scc.ncomps, 1);
  // Process components in topological order: comp ids from Tarjan are
  // reverse-topological over successors, i.e. if u -> w then
  // comp[w] <= comp[u] when w reachable... safer: iterate relaxations.
  bool changed = true;
  int rounds = 0;
  while (changed) {
    changed = false;
    if (++rounds > scc.ncomps + 2) break;
    for (int v = 0; v < n; v++) {
      if (!p.is_intensional(v)) continue;
      for (auto [w, neg] : scc.succ[v]) {
        if (scc.comp[v] == scc.comp[w]) {
          if (neg) {
            // Collect the offending component as a witness cycle.
            std::vector<int> cycle;
            for (int u = 0; u < n; u++)
              if (p.is_intensional(u) && scc.comp[u] == scc.comp[v])
                cycle.push_back(u);
            std::string msg = "not stratifiable: negative cycle through";
            for (int u : cycle) msg += " " + p.rels.name(u);
            throw NotStratifiableError(msg, cycle);
          }
          continue;
        }
        int need = comp_strat[scc.comp[v]] + (neg ? 1 : 0);
        if (comp_strat[scc.comp[w]] < need) {
          comp_strat[scc.comp[w]] = need;
          changed = true;
        }
      }
    }
  }

  StrataAssignment sa;
  sa.strat.assign(n, 0);
  for (int v = 0; v < n; v++) {
    if (!p.is_intensional(v)) continue;
    sa.strat[v] = comp_strat[scc.comp[v]];
    sa.num_strata = std::max(sa.num_strata, sa.strat[v]);
  }
  check_stratification(p, sa);
  return sa;
}

void check_stratification(const Program& p, const StrataAssignment& s) {
  for (int v = 0; v < p.rels.size(); v++) {
    if (p.is_intensional(v) && s.strat[v] < 1)
      throw ValidationError("intensional relation " + p.rels.name(v) +
                            " has stratum < 1");
    if (!p.is_intensional(v) && s.strat[v] != 0)
      throw ValidationError("extensional relation " + p.rels.name(v) +
                            " has nonzero stratum");
  }
  for (const auto& r : p.rules) {
    int hs = s.strat[r.head.rel];
    for (const auto& lit : r.body) {
      if (!p.is_intensional(lit.atom.rel)) continue;
      int ls = s.strat[lit.atom.rel];
      if (lit.positive && ls > hs)
        throw ValidationError("stratification violates condition (ii) on " +
                              p.rels.name(lit.atom.rel));
      if (!lit.positive && ls >= hs)
        throw ValidationError("stratification violates condition (iii) on " +
                              p.rels.name(lit.atom.rel));
    }
  }
}

int body_size(const Program& p) {
  int max_atoms = 0;
  for (const auto& r : p.rules)
    max_atoms = std::max(max_atoms, static_cast<int>(r.body.size()));
  return max_atoms * p.arity();
}

namespace {

bool pair_guarded(const Rule& r, int va, int vb) {
  for (const auto& lit : r.body) {
    if (!lit.positive) continue;
    bool has_a = false, has_b = false;
    for (int v : lit.atom.vars) {
      has_a |= v == va;
      has_b |= v == vb;
    }
    if (has_a && has_b) return true;
  }
  return false;
}

}  // namespace

GuardReport check_cfg(const Program& p) {
  GuardReport rep;
  for (size_t ri = 0; ri < p.rules.size(); ri++) {
    const Rule& r = p.rules[ri];
    for (size_t i = 0; i < r.head.vars.size(); i++)
      for (size_t j = i + 1; j < r.head.vars.size(); j++) {
        int va = r.head.vars[i], vb = r.head.vars[j];
        if (va == vb) continue;
        if (!pair_guarded(r, va, vb)) {
          rep.pass = false;
          rep.violations.push_back({static_cast<int>(ri), -1,
                                    r.var_names[va], r.var_names[vb]});
        }
      }
  }
  return rep;
}

GuardReport check_gn(const Program& p) {
  GuardReport rep;
  for (size_t ri = 0; ri < p.rules.size(); ri++) {
    const Rule& r = p.rules[ri];
    for (size_t li = 0; li < r.body.size(); li++) {
      const auto& lit = r.body[li];
      if (lit.positive) continue;
      for (size_t i = 0; i < lit.atom.vars.size(); i++)
        for (size_t j = i + 1; j < lit.atom.vars.size(); j++) {
          int va = lit.atom.vars[i], vb = lit.atom.vars[j];
          if (va == vb) continue;
          if (!pair_guarded(r, va, vb)) {
            rep.pass = false;
            rep.violations.push_back({static_cast<int>(ri),
                                      static_cast<int>(li), r.var_names[va],
                                      r.var_names[vb]});
          }
        }
    }
  }
  return rep;
}

std::vector<int> map_program_relations(const Program& p, const Instance& inst) {
  std::vector<int> m(p.rels.size(), -1);
  for (int r = 0; r < p.rels.size(); r++) {
    if (p.is_intensional(r)) continue;
    int ir = inst.sig().id_of(p.rels.name(r));
    if (ir < 0) continue;  // empty relation
    if (inst.sig().arity(ir) != p.rels.arity(r))
      throw ValidationError("relation " + p.rels.name(r) +
                            " has arity " + std::to_string(inst.sig().arity(ir)) +
                            " in the instance but " +
                            std::to_string(p.rels.arity(r)) + " in the program");
    m[r] = ir;
  }
  return m;
}

namespace {

// One rule application pass: finds all matches of r's body in the current
// database and derives head facts.
struct RuleMatcher {
  const Program& p;
  const Rule& r;
  const std::vector<std::vector<std::vector<int>>>& tuples;  // per program rel
  const std::vector<std::set<std::vector<int>>>& tuple_sets;
  const std::vector<int>& domain;

  std::vector<std::vector<int>>* out;
  std::set<std::vector<int>>* out_set;

  std::vector<int> asg;  // var -> element or -1
  std::vector<char> matched;
  bool derived_any = false;

  bool lit_check(const RuleAtom& a) const {
    std::vector<int> t;
    t.reserve(a.vars.size());
    for (int v : a.vars) t.push_back(asg[v]);
    return tuple_sets[a.rel].count(t) > 0;
  }

  void emit() {
    for (const auto& lit : r.body)
      if (!lit.positive && lit_check(lit.atom)) return;
    std::vector<int> t;
    t.reserve(r.head.vars.size());
    for (int v : r.head.vars) t.push_back(asg[v]);
    if (out_set->insert(t).second) {
      out->push_back(t);
      derived_any = true;
    }
  }

  // All positive literals matched; enumerate any still-unbound variables
  // over the domain, then check negative literals and emit.
  void finish() {
    int unbound = -1;
    for (int v = 0; v < r.num_vars() && unbound < 0; v++)
      if (asg[v] < 0) unbound = v;
    if (unbound < 0) {
      emit();
      return;
    }
    for (int e : domain) {
      asg[unbound] = e;
      finish();
    }
    asg[unbound] = -1;
  }

  void match_positives() {
    // Pick the unmatched positive literal with the most bound variables.
    int best = -1, best_bound = -1;
    for (size_t i = 0; i < r.body.size(); i++) {
      if (matched[i] || !r.body[i].positive) continue;
      int bound = 0;
      for (int v : r.body[i].atom.vars) bound += asg[v] >= 0;
      if (bound > best_bound) {
        best_bound = bound;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) {
      finish();
      return;
    }
    matched[best] = 1;
    const RuleAtom& a = r.body[best].atom;
    // Derivations may append to the head relation's tuple list while we
    // iterate it (recursive rules), so index against a size snapshot.
    size_t limit = tuples[a.rel].size();
    for (size_t ti = 0; ti < limit; ti++) {
      std::vector<int> t = tuples[a.rel][ti];
      std::vector<int> bound_here;
      bool ok = true;
      for (size_t i = 0; i < a.vars.size() && ok; i++) {
        int v = a.vars[i];
        if (asg[v] < 0) {
          asg[v] = t[i];
          bound_here.push_back(v);
        } else if (asg[v] != t[i]) {
          ok = false;
        }
      }
      if (ok) match_positives();
      for (int v : bound_here) asg[v] = -1;
    }
    matched[best] = 0;
  }

  void run() {
    asg.assign(r.num_vars(), -1);
    matched.assign(r.body.size(), 0);
    match_positives();
  }
};

}  // namespace

EvalResult naive_eval(const Program& p, const Instance& inst,
                      const std::optional<std::vector<int>>& domain,
                      const std::optional<StrataAssignment>& strata) {
  StrataAssignment sa = strata ? *strata : stratify(p);
  if (strata) check_stratification(p, sa);
  std::vector<int> relmap = map_program_relations(p, inst);
  std::vector<int> dom = domain ? *domain : inst.active_domain();

  int nrels = p.rels.size();
  std::vector<std::vector<std::vector<int>>> tuples(nrels);
  std::vector<std::set<std::vector<int>>> tuple_sets(nrels);
  for (const auto& f : inst.facts()) {
    for (int r = 0; r < nrels; r++) {
      if (relmap[r] != f.rel) continue;
      if (tuple_sets[r].insert(f.args).second) tuples[r].push_back(f.args);
    }
  }

  for (int s = 1; s <= sa.num_strata; s++) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& r : p.rules) {
        if (sa.strat[r.head.rel] != s) continue;
        RuleMatcher m{p,
                      r,
                      tuples,
                      tuple_sets,
                      dom,
                      &tuples[r.head.rel],
                      &tuple_sets[r.head.rel]};
        m.run();
        changed |= m.derived_any;
      }
    }
  }

  EvalResult res;
  for (int r = 0; r < nrels; r++) {
    if (!p.is_intensional(r)) continue;
    for (const auto& t : tuples[r]) res.derived.push_back(Fact{r, t});
  }
  res.goal = !tuple_sets[p.goal_rel].empty();
  return res;
}

}  // namespace cfgd
