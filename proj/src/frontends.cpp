#include "cfgd/frontends.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace cfgd {

namespace {

int declare_intensional(Program& p, const std::string& name, int arity) {
  int id = p.rels.declare(name, arity, /*zero_ary_ok=*/true);
  if (static_cast<int>(p.intensional.size()) <= id)
    p.intensional.resize(id + 1, 0);
  p.intensional[id] = 1;
  return id;
}

int declare_extensional(Program& p, const std::string& name, int arity) {
  int id = p.rels.declare(name, arity);
  if (static_cast<int>(p.intensional.size()) <= id)
    p.intensional.resize(id + 1, 0);
  return id;
}

std::string fresh_rel_name(const Signature& used, const std::string& base,
                           int& counter) {
  for (;;) {
    std::string name = base + std::to_string(counter++);
    if (!used.has(name)) return name;
  }
}

}  // namespace

// ---------- Conjunctive queries ----------

ConjunctiveQuery parse_cq(const std::string& text) {
  ConjunctiveQuery q;
  std::map<std::string, int> var_ids;
  auto var_of = [&](const std::string& name) {
    auto it = var_ids.find(name);
    if (it != var_ids.end()) return it->second;
    int id = static_cast<int>(q.var_names.size());
    q.var_names.push_back(name);
    var_ids[name] = id;
    return id;
  };
  size_t pos = 0;
  int line = 1, col = 1;
  auto advance = [&]() {
    if (text[pos] == '\n') {
      line++;
      col = 1;
    } else {
      col++;
    }
    pos++;
  };
  auto skip = [&]() {
    for (;;) {
      while (pos < text.size() &&
             (std::isspace(static_cast<unsigned char>(text[pos])) ||
              text[pos] == ','))
        advance();
      if (pos < text.size() && text[pos] == '%') {
        while (pos < text.size() && text[pos] != '\n') advance();
        continue;
      }
      break;
    }
  };
  auto ident = [&]() {
    size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) ||
            text[pos] == '_'))
      advance();
    if (start == pos) throw ParseError(line, col, "expected identifier");
    return text.substr(start, pos - start);
  };
  for (;;) {
    skip();
    if (pos >= text.size()) break;
    std::string rel = ident();
    skip();
    if (pos >= text.size() || text[pos] != '(')
      throw ParseError(line, col, "expected '('");
    advance();
    std::vector<std::string> vars;
    for (;;) {
      skip();
      if (pos < text.size() && text[pos] == ')') {
        advance();
        break;
      }
      vars.push_back(ident());
    }
    if (vars.empty()) throw ParseError(line, col, "atoms need arguments");
    int relid = q.sig.declare(rel, static_cast<int>(vars.size()));
    RuleAtom atom;
    atom.rel = relid;
    for (const auto& v : vars) atom.vars.push_back(var_of(v));
    q.atoms.push_back(std::move(atom));
  }
  if (q.atoms.empty()) throw ValidationError("empty conjunctive query");
  return q;
}

PrimalGraph cq_primal(const ConjunctiveQuery& q) {
  PrimalGraph g;
  if (q.num_vars() > 0) g.ensure(q.num_vars() - 1);
  for (const auto& a : q.atoms)
    for (size_t i = 0; i < a.vars.size(); i++)
      for (size_t j = i + 1; j < a.vars.size(); j++)
        if (a.vars[i] != a.vars[j]) g.add_edge(a.vars[i], a.vars[j]);
  return g;
}

TreeDecomposition gyo_join_tree(const ConjunctiveQuery& q) {
  int n = static_cast<int>(q.atoms.size());
  std::vector<std::set<int>> work(n);
  for (int i = 0; i < n; i++)
    work[i] = std::set<int>(q.atoms[i].vars.begin(), q.atoms[i].vars.end());
  std::vector<char> removed(n, 0);
  std::vector<int> parent(n, -1);

  std::vector<int> var_count(q.num_vars(), 0);
  for (int i = 0; i < n; i++)
    for (int v : work[i]) var_count[v]++;

  int remaining = n;
  bool changed = true;
  while (changed && remaining > 1) {
    changed = false;
    // Ear vertices: occurring in exactly one remaining hyperedge.
    for (int i = 0; i < n; i++) {
      if (removed[i]) continue;
      for (auto it = work[i].begin(); it != work[i].end();) {
        if (var_count[*it] == 1) {
          var_count[*it] = 0;
          it = work[i].erase(it);
          changed = true;
        } else {
          ++it;
        }
      }
    }
    // Absorb hyperedges included in another one.
    for (int i = 0; i < n && remaining > 1; i++) {
      if (removed[i]) continue;
      for (int j = 0; j < n; j++) {
        if (i == j || removed[j]) continue;
        if (std::includes(work[j].begin(), work[j].end(), work[i].begin(),
                          work[i].end())) {
          removed[i] = 1;
          parent[i] = j;
          for (int v : work[i]) var_count[v]--;
          remaining--;
          changed = true;
          break;
        }
      }
    }
  }
  if (remaining > 1)
    throw NotAlphaAcyclicError(
        "not-alpha-acyclic: GYO reduction stalled with " +
        std::to_string(remaining) + " hyperedges");

  int root_atom = -1;
  for (int i = 0; i < n; i++)
    if (!removed[i]) root_atom = i;
  // Bags carry the full variable sets of the original atoms.
  TreeDecomposition td;
  std::vector<int> bag_of(n, -1);
  std::deque<int> queue{root_atom};
  std::vector<std::vector<int>> children(n);
  for (int i = 0; i < n; i++)
    if (parent[i] >= 0) children[parent[i]].push_back(i);
  while (!queue.empty()) {
    int i = queue.front();
    queue.pop_front();
    std::vector<int> elems(q.atoms[i].vars.begin(), q.atoms[i].vars.end());
    bag_of[i] = td.add_bag(elems, parent[i] >= 0 ? bag_of[parent[i]] : -1);
    for (int c : children[i]) queue.push_back(c);
  }
  return td;
}

TreeDecomposition bound_degree(const TreeDecomposition& td) {
  TreeDecomposition out;
  if (td.empty()) return out;
  // (original bag, new parent) pairs, processed top-down.
  std::deque<std::pair<int, int>> queue{{td.root, -1}};
  while (!queue.empty()) {
    auto [b, new_parent] = queue.front();
    queue.pop_front();
    int nb = out.add_bag(td.bags[b].elems, new_parent);
    // Group children by their interface with b, keeping first-seen order.
    std::vector<std::pair<std::vector<int>, std::vector<int>>> groups;
    for (int c : td.bags[b].children) {
      std::vector<int> inter;
      std::set_intersection(td.bags[b].elems.begin(), td.bags[b].elems.end(),
                            td.bags[c].elems.begin(), td.bags[c].elems.end(),
                            std::back_inserter(inter));
      bool found = false;
      for (auto& [key, members] : groups)
        if (key == inter) {
          members.push_back(c);
          found = true;
          break;
        }
      if (!found) groups.push_back({inter, {c}});
    }
    for (auto& [interface, members] : groups) {
      int chain = nb;
      for (int c : members) {
        chain = out.add_bag(interface, chain);
        queue.push_back({c, chain});
      }
    }
  }
  return out;
}

Program cq_to_cfg(const ConjunctiveQuery& q, const TreeDecomposition& td_in,
                  CqTranslationStats* stats) {
  PrimalGraph g = cq_primal(q);
  if (!check_simplicial(g, td_in))
    throw NotSimplicialError(
        "not-simplicial: some parent/child interface is not a clique");
  int k = td_in.width();

  TreeDecomposition td = bound_degree(td_in);
  // Ensure an empty root with exactly one child.
  if (!td.bags[td.root].elems.empty() ||
      td.bags[td.root].children.size() != 1) {
    TreeDecomposition with_root;
    with_root.add_bag({}, -1);
    std::deque<std::pair<int, int>> queue{{td.root, 0}};
    while (!queue.empty()) {
      auto [b, parent] = queue.front();
      queue.pop_front();
      int nb = with_root.add_bag(td.bags[b].elems, parent);
      for (int c : td.bags[b].children) queue.push_back({c, nb});
    }
    td = std::move(with_root);
  }

  int nbags = static_cast<int>(td.bags.size());
  // BFS order and depths.
  std::vector<int> order, depth(nbags, 0);
  {
    std::deque<int> queue{td.root};
    while (!queue.empty()) {
      int b = queue.front();
      queue.pop_front();
      order.push_back(b);
      for (int c : td.bags[b].children) {
        depth[c] = depth[b] + 1;
        queue.push_back(c);
      }
    }
  }

  // Topmost bag of each atom.
  std::vector<std::vector<int>> atoms_of(nbags);
  for (size_t ai = 0; ai < q.atoms.size(); ai++) {
    int best = -1;
    for (int b = 0; b < nbags; b++) {
      bool all = true;
      for (int v : q.atoms[ai].vars)
        if (!std::binary_search(td.bags[b].elems.begin(),
                                td.bags[b].elems.end(), v)) {
          all = false;
          break;
        }
      if (all && (best < 0 || depth[b] < depth[best])) best = b;
    }
    if (best < 0)
      throw NotSimplicialError("atom not covered by any bag");
    atoms_of[best].push_back(static_cast<int>(ai));
  }

  // First atom containing each variable pair, and each single variable.
  std::map<std::pair<int, int>, int> pair_atom;
  std::vector<int> var_atom(q.num_vars(), -1);
  for (size_t ai = 0; ai < q.atoms.size(); ai++) {
    const auto& vars = q.atoms[ai].vars;
    for (size_t i = 0; i < vars.size(); i++) {
      if (var_atom[vars[i]] < 0) var_atom[vars[i]] = static_cast<int>(ai);
      for (size_t j = i + 1; j < vars.size(); j++) {
        if (vars[i] == vars[j]) continue;
        auto key = std::minmax(vars[i], vars[j]);
        pair_atom.emplace(key, static_cast<int>(ai));
      }
    }
  }

  Program p;
  for (int r = 0; r < q.sig.size(); r++)
    declare_extensional(p, q.sig.name(r), q.sig.arity(r));
  int name_counter = 0;
  std::vector<int> pred_of(nbags, -1);  // intensional predicate per non-root
  std::vector<std::vector<int>> interface_of(nbags);
  for (int b : order) {
    if (b == td.root) continue;
    std::vector<int> inter;
    std::set_intersection(td.bags[b].elems.begin(), td.bags[b].elems.end(),
                          td.bags[td.bags[b].parent].elems.begin(),
                          td.bags[td.bags[b].parent].elems.end(),
                          std::back_inserter(inter));
    interface_of[b] = inter;
    if (td.bags[b].parent == td.root) {
      pred_of[b] = declare_intensional(p, "Goal", 0);
      p.goal_rel = pred_of[b];
      assert(inter.empty());
    } else {
      pred_of[b] = declare_intensional(
          p, fresh_rel_name(p.rels, "Sub", name_counter),
          static_cast<int>(inter.size()));
    }
  }

  int max_bag_atoms = 0, max_guard_atoms = 0;
  // One rule per non-root bag, emitted bottom-up.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int b = *it;
    if (b == td.root) continue;
    Rule rule;
    std::map<int, int> var_ids;  // CQ var -> rule var
    auto rule_var = [&](int cq_var) {
      auto vit = var_ids.find(cq_var);
      if (vit != var_ids.end()) return vit->second;
      int id = static_cast<int>(rule.var_names.size());
      rule.var_names.push_back("V" + std::to_string(cq_var));
      var_ids[cq_var] = id;
      return id;
    };
    int fresh_count = 0;
    auto fresh_var = [&]() {
      int id = static_cast<int>(rule.var_names.size());
      rule.var_names.push_back("F" + std::to_string(fresh_count++));
      return id;
    };
    auto add_guard_copy = [&](int ai, std::set<int> keep) {
      const RuleAtom& a = q.atoms[ai];
      RuleAtom copy;
      copy.rel = a.rel;
      std::map<int, int> local;  // original var -> freshened var (per copy)
      for (int v : a.vars) {
        if (keep.count(v)) {
          copy.vars.push_back(rule_var(v));
        } else {
          auto lit = local.find(v);
          if (lit == local.end()) lit = local.emplace(v, fresh_var()).first;
          copy.vars.push_back(lit->second);
        }
      }
      rule.body.push_back({true, std::move(copy)});
    };

    rule.head.rel = pred_of[b];
    for (int v : interface_of[b]) rule.head.vars.push_back(rule_var(v));

    int guard_atoms = 0;
    const auto& s = interface_of[b];
    for (size_t i = 0; i < s.size(); i++)
      for (size_t j = i + 1; j < s.size(); j++) {
        auto key = std::minmax(s[i], s[j]);
        auto pit = pair_atom.find(key);
        assert(pit != pair_atom.end());  // guaranteed by simpliciality
        add_guard_copy(pit->second, {s[i], s[j]});
        guard_atoms++;
      }
    for (int ai : atoms_of[b]) {
      RuleAtom copy;
      copy.rel = q.atoms[ai].rel;
      for (int v : q.atoms[ai].vars) copy.vars.push_back(rule_var(v));
      rule.body.push_back({true, std::move(copy)});
    }
    for (int c : td.bags[b].children) {
      RuleAtom sub;
      sub.rel = pred_of[c];
      for (int v : interface_of[c]) sub.vars.push_back(rule_var(v));
      rule.body.push_back({true, std::move(sub)});
    }
    // Interface variables that do not occur in the body yet (possible when
    // the interface is a single variable whose atoms live elsewhere in the
    // decomposition) get a freshened witness atom.
    int witnesses = 0;
    {
      std::set<int> in_body;
      for (const auto& lit : rule.body)
        for (int v : lit.atom.vars) in_body.insert(v);
      for (int v : s)
        if (!in_body.count(var_ids[v])) {
          add_guard_copy(var_atom[v], {v});
          witnesses++;
        }
    }
    max_bag_atoms = std::max(
        max_bag_atoms, static_cast<int>(atoms_of[b].size()) + witnesses);
    max_guard_atoms = std::max(max_guard_atoms, guard_atoms);
    if (rule.body.empty()) {
      // Trivially true subquery: witness any atom of the query.
      add_guard_copy(0, {});
    }
    p.rules.push_back(std::move(rule));
  }
  p.check_well_formed();
  if (stats) {
    stats->width = k;
    stats->max_bag_atoms = max_bag_atoms;
    stats->max_guard_atoms = max_guard_atoms;
    stats->f_bound =
        (k + 1) * (max_bag_atoms + (1 << (k + 1)) + k * (k + 1) / 2);
  }
  return p;
}

// ---------- Regular path queries ----------

namespace {

struct RegexParser {
  const std::string& s;
  size_t pos = 0;

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      pos++;
  }
  bool at_base() {
    skip();
    if (pos >= s.size()) return false;
    char c = s[pos];
    return c == '(' || std::isalnum(static_cast<unsigned char>(c)) ||
           c == '_';
  }
  std::unique_ptr<RegexNode> parse_expr() {
    auto left = parse_term();
    skip();
    while (pos < s.size() && s[pos] == '|') {
      pos++;
      auto right = parse_term();
      auto node = std::make_unique<RegexNode>();
      node->kind = RegexNode::Union;
      node->kids.push_back(std::move(left));
      node->kids.push_back(std::move(right));
      left = std::move(node);
      skip();
    }
    return left;
  }
  std::unique_ptr<RegexNode> parse_term() {
    auto left = parse_factor();
    for (;;) {
      skip();
      if (pos < s.size() && s[pos] == '.') {
        pos++;
      } else if (!at_base()) {
        break;
      }
      auto right = parse_factor();
      auto node = std::make_unique<RegexNode>();
      node->kind = RegexNode::Concat;
      node->kids.push_back(std::move(left));
      node->kids.push_back(std::move(right));
      left = std::move(node);
    }
    return left;
  }
  std::unique_ptr<RegexNode> parse_factor() {
    auto base = parse_base();
    for (;;) {
      skip();
      if (pos < s.size() && s[pos] == '*') {
        pos++;
        auto node = std::make_unique<RegexNode>();
        node->kind = RegexNode::Star;
        node->kids.push_back(std::move(base));
        base = std::move(node);
      } else {
        break;
      }
    }
    return base;
  }
  std::unique_ptr<RegexNode> parse_base() {
    skip();
    if (pos >= s.size()) throw ParseError(1, static_cast<int>(pos) + 1,
                                          "unexpected end of regex");
    if (s[pos] == '(') {
      pos++;
      auto e = parse_expr();
      skip();
      if (pos >= s.size() || s[pos] != ')')
        throw ParseError(1, static_cast<int>(pos) + 1, "expected ')'");
      pos++;
      return e;
    }
    size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      pos++;
    if (pos == start)
      throw ParseError(1, static_cast<int>(pos) + 1, "expected letter");
    std::string name = s.substr(start, pos - start);
    auto node = std::make_unique<RegexNode>();
    if (name == "eps") {
      node->kind = RegexNode::Epsilon;
      return node;
    }
    node->kind = RegexNode::Letter;
    node->letter.rel = name;
    if (pos < s.size() && s[pos] == '-') {
      pos++;
      node->letter.reversed = true;
    }
    return node;
  }
};

void collect_letters(const RegexNode& n, std::set<std::string>& out) {
  if (n.kind == RegexNode::Letter) out.insert(n.letter.rel);
  for (const auto& k : n.kids) collect_letters(*k, out);
}

}  // namespace

RegularPathQuery parse_rpq(const std::string& text) {
  RegularPathQuery q;
  q.text = text;
  RegexParser parser{text};
  q.ast = parser.parse_expr();
  parser.skip();
  if (parser.pos != text.size())
    throw ParseError(1, static_cast<int>(parser.pos) + 1,
                     "trailing characters in regex");
  std::set<std::string> letters;
  collect_letters(*q.ast, letters);
  q.letters.assign(letters.begin(), letters.end());
  return q;
}

namespace {

struct NfaBuilder {
  Nfa nfa;
  int fresh() { return nfa.num_states++; }
  void edge(int a, int b, std::optional<RpqLetter> l) {
    nfa.edges.push_back({a, b, std::move(l)});
  }

  std::pair<int, int> build(const RegexNode& n) {
    switch (n.kind) {
      case RegexNode::Letter: {
        int i = fresh(), f = fresh();
        edge(i, f, n.letter);
        return {i, f};
      }
      case RegexNode::Epsilon: {
        int i = fresh(), f = fresh();
        edge(i, f, std::nullopt);
        return {i, f};
      }
      case RegexNode::Concat: {
        auto [i1, f1] = build(*n.kids[0]);
        auto [i2, f2] = build(*n.kids[1]);
        edge(f1, i2, std::nullopt);
        return {i1, f2};
      }
      case RegexNode::Union: {
        auto [i1, f1] = build(*n.kids[0]);
        auto [i2, f2] = build(*n.kids[1]);
        int i = fresh(), f = fresh();
        edge(i, i1, std::nullopt);
        edge(i, i2, std::nullopt);
        edge(f1, f, std::nullopt);
        edge(f2, f, std::nullopt);
        return {i, f};
      }
      case RegexNode::Star: {
        auto [i1, f1] = build(*n.kids[0]);
        int i = fresh(), f = fresh();
        edge(i, i1, std::nullopt);
        edge(f1, f, std::nullopt);
        edge(f1, i1, std::nullopt);
        edge(i, f, std::nullopt);
        return {i, f};
      }
    }
    throw ValidationError("bad regex node");
  }
};

}  // namespace

Nfa thompson(const RegularPathQuery& q) {
  NfaBuilder b;
  auto [i, f] = b.build(*q.ast);
  b.nfa.initial = i;
  b.nfa.final = f;
  return b.nfa;
}

Nfa reverse_nfa(const Nfa& a) {
  Nfa r;
  r.num_states = a.num_states;
  r.initial = a.final;
  r.final = a.initial;
  for (const auto& e : a.edges) {
    std::optional<RpqLetter> letter = e.letter;
    if (letter) letter->reversed = !letter->reversed;
    r.edges.push_back({e.to, e.from, std::move(letter)});
  }
  return r;
}

namespace {

Signature binary_signature_for(const RegularPathQuery& q,
                               const std::optional<Signature>& sig) {
  Signature s;
  if (sig) {
    for (int r = 0; r < sig->size(); r++) {
      if (sig->arity(r) != 2)
        throw ValidationError("2RPQ translation requires an all-binary "
                              "signature; " +
                              sig->name(r) + " has arity " +
                              std::to_string(sig->arity(r)));
      s.declare(sig->name(r), 2);
    }
  } else {
    for (const auto& l : q.letters) s.declare(l, 2);
  }
  for (const auto& l : q.letters)
    if (!s.has(l))
      throw ValidationError("regex letter " + l + " is not in the signature");
  return s;
}

// Shared machinery for 2RPQ and SAC2RPQ translation: emits the monadic
// rules simulating an NFA over paths.
struct RpqEmitter {
  Program& p;
  std::vector<int> ext_ids;
  int name_counter = 0;

  int unary(const std::string& base) {
    return declare_intensional(p, fresh_rel_name(p.rels, base, name_counter),
                               1);
  }

  // P_init holds of every active-domain element.
  void seed_everywhere(int pred) {
    for (int rel : ext_ids) {
      for (int which = 0; which < 2; which++) {
        Rule r;
        r.var_names = {"X", "Y"};
        r.head = {pred, {which}};
        r.body.push_back({true, {rel, {0, 1}}});
        p.rules.push_back(std::move(r));
      }
    }
  }

  // States of `a` become unary predicates; `from_pred` feeds the initial
  // state (or every element when from_pred < 0); returns the final state's
  // predicate.
  int emit_nfa(const Nfa& a, int from_pred) {
    std::vector<int> pred(a.num_states);
    for (int s = 0; s < a.num_states; s++) pred[s] = unary("S");
    if (from_pred >= 0) {
      Rule r;
      r.var_names = {"X"};
      r.head = {pred[a.initial], {0}};
      r.body.push_back({true, {from_pred, {0}}});
      p.rules.push_back(std::move(r));
    } else {
      seed_everywhere(pred[a.initial]);
    }
    for (const auto& e : a.edges) {
      Rule r;
      if (!e.letter) {
        r.var_names = {"X"};
        r.head = {pred[e.to], {0}};
        r.body.push_back({true, {pred[e.from], {0}}});
      } else {
        int rel = p.rels.require(e.letter->rel);
        r.var_names = {"X", "Y"};
        r.head = {pred[e.to], {1}};
        r.body.push_back({true, {pred[e.from], {0}}});
        if (e.letter->reversed)
          r.body.push_back({true, {rel, {1, 0}}});
        else
          r.body.push_back({true, {rel, {0, 1}}});
      }
      p.rules.push_back(std::move(r));
    }
    return pred[a.final];
  }

  // The (*)-rule rewriting: conjoin unary predicates in declaration order
  // through a chain of bounded-body rules; returns the chain's head.
  int chain(const std::vector<int>& preds, const std::string& base) {
    assert(!preds.empty());
    int m = static_cast<int>(preds.size());
    std::vector<int> c(m);
    for (int i = 0; i < m; i++) c[i] = unary(base);
    {
      Rule r;
      r.var_names = {"X"};
      r.head = {c[m - 1], {0}};
      r.body.push_back({true, {preds[m - 1], {0}}});
      p.rules.push_back(std::move(r));
    }
    for (int i = m - 2; i >= 0; i--) {
      Rule r;
      r.var_names = {"X"};
      r.head = {c[i], {0}};
      r.body.push_back({true, {c[i + 1], {0}}});
      r.body.push_back({true, {preds[i], {0}}});
      p.rules.push_back(std::move(r));
    }
    return c[0];
  }
};

}  // namespace

Program rpq_to_cfg(const RegularPathQuery& q,
                   const std::optional<Signature>& sig) {
  Signature s = binary_signature_for(q, sig);
  Program p;
  RpqEmitter em{p};
  for (int r = 0; r < s.size(); r++)
    em.ext_ids.push_back(declare_extensional(p, s.name(r), 2));
  Nfa a = thompson(q);
  int final_pred = em.emit_nfa(a, -1);
  int goal = declare_intensional(p, "Goal", 0);
  Rule r;
  r.var_names = {"X"};
  r.head = {goal, {}};
  r.body.push_back({true, {final_pred, {0}}});
  p.rules.push_back(std::move(r));
  p.goal_rel = goal;
  p.check_well_formed();
  return p;
}

Sac2Rpq parse_sac2rpq(const std::string& text) {
  Sac2Rpq q;
  std::set<std::string> vars;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    auto hash = line.find('%');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string a, b;
    if (!(ls >> a)) continue;
    if (a == "var") {
      if (!(ls >> b)) throw ParseError(lineno, 1, "expected variable name");
      vars.insert(b);
      continue;
    }
    if (!(ls >> b)) throw ParseError(lineno, 1, "expected 'x y <regex>'");
    std::string regex;
    std::getline(ls, regex);
    vars.insert(a);
    vars.insert(b);
    q.edges.push_back({a, b, parse_rpq(regex)});
  }
  q.vars.assign(vars.begin(), vars.end());
  return q;
}

Program sac2rpq_to_cfg(const Sac2Rpq& q, const std::optional<Signature>& sig) {
  // Validate strong acyclicity.
  std::map<std::string, int> var_id;
  for (const auto& v : q.vars) var_id.emplace(v, var_id.size());
  int n = static_cast<int>(var_id.size());
  std::set<std::pair<int, int>> seen_edges;
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (other, edge idx)
  for (size_t ei = 0; ei < q.edges.size(); ei++) {
    const auto& e = q.edges[ei];
    int a = var_id.at(e.from), b = var_id.at(e.to);
    if (a == b)
      throw NotStronglyAcyclicError("not-strongly-acyclic: self-loop on " +
                                    e.from);
    auto key = std::minmax(a, b);
    if (!seen_edges.insert(key).second)
      throw NotStronglyAcyclicError("not-strongly-acyclic: multi-edge {" +
                                    e.from + "," + e.to + "}");
    adj[a].push_back({b, static_cast<int>(ei)});
    adj[b].push_back({a, static_cast<int>(ei)});
  }

  Signature s;
  {
    std::set<std::string> letters;
    for (const auto& e : q.edges)
      letters.insert(e.rpq.letters.begin(), e.rpq.letters.end());
    if (sig) {
      RegularPathQuery dummy;
      dummy.letters.assign(letters.begin(), letters.end());
      s = binary_signature_for(dummy, sig);
    } else {
      if (letters.empty())
        throw ValidationError("SAC2RPQ uses no relations; supply a signature");
      for (const auto& l : letters) s.declare(l, 2);
    }
  }

  Program p;
  RpqEmitter em{p};
  for (int r = 0; r < s.size(); r++)
    em.ext_ids.push_back(declare_extensional(p, s.name(r), 2));

  // Root each connected component at its lexicographically smallest
  // variable and emit the tree bottom-up.
  std::vector<int> comp(n, -1), parent(n, -1), parent_edge(n, -1);
  std::vector<std::vector<int>> comp_order;
  for (const auto& [name, v] : var_id) {
    if (comp[v] >= 0) continue;
    int cid = static_cast<int>(comp_order.size());
    comp_order.push_back({});
    std::deque<int> queue{v};
    comp[v] = cid;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      comp_order[cid].push_back(u);
      for (auto [w, ei] : adj[u]) {
        if (comp[w] >= 0) {
          if (w != parent[u] && comp[w] == cid && parent[w] != u)
            throw NotStronglyAcyclicError("not-strongly-acyclic: cycle");
          continue;
        }
        comp[w] = cid;
        parent[w] = u;
        parent_edge[w] = ei;
        queue.push_back(w);
      }
    }
  }

  std::vector<std::string> names(n);
  for (const auto& [name, v] : var_id) names[v] = name;
  std::vector<int> node_pred(n, -1);  // P'_n
  std::vector<int> goal_preds;
  for (const auto& nodes : comp_order) {
    // Bottom-up: reverse BFS order.
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
      int u = *it;
      std::vector<int> child_preds;  // P''_{u,child} in tree order
      for (auto [w, ei] : adj[u]) {
        if (parent[w] != u || w == u) continue;
        const auto& e = q.edges[ei];
        // The edge read from the child (lower) to u (upper) must follow
        // the 2RPQ's direction, else use the reverse-language automaton.
        Nfa nfa = thompson(e.rpq);
        bool lower_is_from = var_id.at(e.from) == w;
        if (!lower_is_from) nfa = reverse_nfa(nfa);
        int final_pred = em.emit_nfa(nfa, node_pred[w]);
        int pp = em.unary("T");
        Rule r;
        r.var_names = {"X"};
        r.head = {pp, {0}};
        r.body.push_back({true, {final_pred, {0}}});
        p.rules.push_back(std::move(r));
        child_preds.push_back(pp);
      }
      int pn = em.unary("N");
      if (child_preds.empty()) {
        em.seed_everywhere(pn);
      } else {
        int chained = em.chain(child_preds, "C");
        Rule r;
        r.var_names = {"X"};
        r.head = {pn, {0}};
        r.body.push_back({true, {chained, {0}}});
        p.rules.push_back(std::move(r));
      }
      node_pred[u] = pn;
    }
    int root = nodes[0];
    int gp = declare_intensional(
        p, fresh_rel_name(p.rels, "Goal_", em.name_counter), 0);
    Rule r;
    r.var_names = {"X"};
    r.head = {gp, {}};
    r.body.push_back({true, {node_pred[root], {0}}});
    p.rules.push_back(std::move(r));
    goal_preds.push_back(gp);
  }

  int goal = declare_intensional(p, "Goal", 0);
  // Conjoin the component goals through a 0-ary chain.
  int m = static_cast<int>(goal_preds.size());
  std::vector<int> c(m);
  for (int i = 0; i < m; i++)
    c[i] = declare_intensional(
        p, fresh_rel_name(p.rels, "G_", em.name_counter), 0);
  {
    Rule r;
    r.head = {c[m - 1], {}};
    r.body.push_back({true, {goal_preds[m - 1], {}}});
    p.rules.push_back(std::move(r));
  }
  for (int i = m - 2; i >= 0; i--) {
    Rule r;
    r.head = {c[i], {}};
    r.body.push_back({true, {c[i + 1], {}}});
    r.body.push_back({true, {goal_preds[i], {}}});
    p.rules.push_back(std::move(r));
  }
  {
    Rule r;
    r.head = {goal, {}};
    r.body.push_back({true, {c[0], {}}});
    p.rules.push_back(std::move(r));
  }
  p.goal_rel = goal;
  p.check_well_formed();
  return p;
}

// ---------- GNF ----------

namespace {

struct SExpr {
  std::string atom;  // empty for lists
  std::vector<SExpr> kids;
  bool is_list() const { return atom.empty(); }
};

struct SExprParser {
  const std::string& s;
  size_t pos = 0;
  void skip() {
    for (;;) {
      while (pos < s.size() &&
             std::isspace(static_cast<unsigned char>(s[pos])))
        pos++;
      if (pos < s.size() && s[pos] == '%') {
        while (pos < s.size() && s[pos] != '\n') pos++;
        continue;
      }
      break;
    }
  }
  SExpr parse() {
    skip();
    if (pos >= s.size())
      throw ParseError(1, static_cast<int>(pos) + 1, "unexpected end");
    if (s[pos] == '(') {
      pos++;
      SExpr e;
      for (;;) {
        skip();
        if (pos >= s.size())
          throw ParseError(1, static_cast<int>(pos) + 1, "missing ')'");
        if (s[pos] == ')') {
          pos++;
          break;
        }
        e.kids.push_back(parse());
      }
      return e;
    }
    size_t start = pos;
    while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) &&
           s[pos] != '(' && s[pos] != ')')
      pos++;
    SExpr e;
    e.atom = s.substr(start, pos - start);
    return e;
  }
};

CqAtomText parse_gnf_atom(const SExpr& e) {
  if (!e.is_list() || e.kids.empty() || e.kids[0].is_list())
    throw NotNormalFormError("not-normal-form: expected an atom");
  CqAtomText a;
  a.rel = e.kids[0].atom;
  for (size_t i = 1; i < e.kids.size(); i++) {
    if (e.kids[i].is_list())
      throw NotNormalFormError("not-normal-form: atom arguments must be "
                               "variables");
    a.vars.push_back(e.kids[i].atom);
  }
  if (a.vars.empty())
    throw NotNormalFormError("not-normal-form: atoms need arguments");
  return a;
}

GnfPhi parse_gnf_phi(const SExpr& e);

GnfPsi parse_gnf_psi(const SExpr& e) {
  if (!e.is_list() || e.kids.empty())
    throw NotNormalFormError("not-normal-form: bad psi formula");
  const std::string& head = e.kids[0].atom;
  GnfPsi psi;
  if (head == "guarded") {
    if (e.kids.size() != 3)
      throw NotNormalFormError("not-normal-form: (guarded <atom> <phi>)");
    psi.kind = GnfPsi::Guarded;
    psi.atom = parse_gnf_atom(e.kids[1]);
    psi.sub = std::make_unique<GnfPhi>(parse_gnf_phi(e.kids[2]));
    return psi;
  }
  if (head == "nguarded") {
    if (e.kids.size() != 3 || !e.kids[2].is_list() ||
        e.kids[2].kids.size() != 2 || !e.kids[2].kids[0].atom.size() ||
        e.kids[2].kids[0].atom != "not")
      throw NotNormalFormError(
          "not-normal-form: (nguarded <atom> (not <phi>))");
    psi.kind = GnfPsi::NGuarded;
    psi.atom = parse_gnf_atom(e.kids[1]);
    psi.sub = std::make_unique<GnfPhi>(parse_gnf_phi(e.kids[2].kids[1]));
    return psi;
  }
  psi.kind = GnfPsi::Atom;
  psi.atom = parse_gnf_atom(e);
  return psi;
}

GnfPhi parse_gnf_phi(const SExpr& e) {
  if (!e.is_list() || e.kids.empty() || e.kids[0].atom != "or")
    throw NotNormalFormError(
        "not-normal-form: phi formulas are (or <disjunct> ...)");
  GnfPhi phi;
  for (size_t i = 1; i < e.kids.size(); i++) {
    const SExpr& d = e.kids[i];
    if (!d.is_list() || d.kids.size() != 3 || d.kids[0].atom != "exists" ||
        !d.kids[1].is_list() || !d.kids[2].is_list() ||
        d.kids[2].kids.empty() || d.kids[2].kids[0].atom != "and")
      throw NotNormalFormError(
          "not-normal-form: disjuncts are (exists (vars) (and psi ...))");
    GnfPhi::Disjunct disj;
    for (const auto& v : d.kids[1].kids) {
      if (v.is_list())
        throw NotNormalFormError("not-normal-form: bad variable list");
      disj.exists.push_back(v.atom);
    }
    for (size_t ci = 1; ci < d.kids[2].kids.size(); ci++)
      disj.conjuncts.push_back(parse_gnf_psi(d.kids[2].kids[ci]));
    if (disj.conjuncts.empty())
      throw NotNormalFormError("not-normal-form: empty conjunction");
    phi.disjuncts.push_back(std::move(disj));
  }
  if (phi.disjuncts.empty())
    throw NotNormalFormError("not-normal-form: empty disjunction");
  return phi;
}

std::set<std::string> free_vars(const GnfPhi& phi);

std::set<std::string> free_vars(const GnfPsi& psi) {
  std::set<std::string> out(psi.atom.vars.begin(), psi.atom.vars.end());
  if (psi.sub) {
    auto sub = free_vars(*psi.sub);
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

std::set<std::string> free_vars(const GnfPhi& phi) {
  std::set<std::string> out;
  for (const auto& d : phi.disjuncts) {
    std::set<std::string> dv;
    for (const auto& c : d.conjuncts) {
      auto cv = free_vars(c);
      dv.insert(cv.begin(), cv.end());
    }
    for (const auto& v : d.exists) dv.erase(v);
    out.insert(dv.begin(), dv.end());
  }
  return out;
}

void validate_guards(const GnfPhi& phi) {
  for (const auto& d : phi.disjuncts)
    for (const auto& c : d.conjuncts) {
      if (!c.sub) continue;
      auto sub_free = free_vars(*c.sub);
      std::set<std::string> guard(c.atom.vars.begin(), c.atom.vars.end());
      for (const auto& v : sub_free)
        if (!guard.count(v))
          throw NotNormalFormError(
              "not-normal-form: guard " + c.atom.rel +
              " does not cover free variable " + v + " of its subformula");
      validate_guards(*c.sub);
    }
}

}  // namespace

GnfPhi parse_gnf(const std::string& text) {
  SExprParser parser{text};
  SExpr e = parser.parse();
  parser.skip();
  if (parser.pos != text.size())
    throw ParseError(1, static_cast<int>(parser.pos) + 1,
                     "trailing characters");
  GnfPhi phi = parse_gnf_phi(e);
  validate_guards(phi);
  return phi;
}

namespace {

int cq_rank_walk(const GnfPhi& phi, bool root) {
  int rank = 0;
  for (const auto& d : phi.disjuncts) {
    int count = root ? 0 : 1;  // the guard injected from the parent
    for (const auto& c : d.conjuncts) {
      count += c.kind == GnfPsi::Atom ? 1 : 2;
      if (c.sub) rank = std::max(rank, cq_rank_walk(*c.sub, false));
    }
    rank = std::max(rank, count);
  }
  return rank;
}

}  // namespace

int gnf_cq_rank(const GnfPhi& phi) { return cq_rank_walk(phi, true); }

namespace {

// Alpha-renaming: existential binders shadow outer variables of the same
// name, so bound variables are renamed apart before translation.
struct AlphaRenamer {
  int counter = 0;

  CqAtomText rename_atom(const CqAtomText& a,
                         const std::map<std::string, std::string>& env) {
    CqAtomText out;
    out.rel = a.rel;
    for (const auto& v : a.vars) {
      auto it = env.find(v);
      out.vars.push_back(it == env.end() ? v : it->second);
    }
    return out;
  }

  GnfPhi rename(const GnfPhi& phi,
                const std::map<std::string, std::string>& env) {
    GnfPhi out;
    for (const auto& d : phi.disjuncts) {
      GnfPhi::Disjunct nd;
      std::map<std::string, std::string> scope = env;
      for (const auto& v : d.exists) {
        std::string fresh = "x" + std::to_string(counter++);
        scope[v] = fresh;
        nd.exists.push_back(fresh);
      }
      for (const auto& c : d.conjuncts) {
        GnfPsi np;
        np.kind = c.kind;
        np.atom = rename_atom(c.atom, scope);
        if (c.sub) np.sub = std::make_unique<GnfPhi>(rename(*c.sub, scope));
        nd.conjuncts.push_back(std::move(np));
      }
      out.disjuncts.push_back(std::move(nd));
    }
    return out;
  }
};

}  // namespace

Program gnf_to_cfg(const GnfPhi& input) {
  auto root_free = free_vars(input);
  if (!root_free.empty())
    throw NotNormalFormError("not-normal-form: the root formula must be "
                             "Boolean (free variable " + *root_free.begin() +
                             ")");
  AlphaRenamer renamer;
  GnfPhi phi = renamer.rename(input, {});
  Program p;
  int name_counter = 0;

  // Declare extensional relations from all atoms and guards.
  std::function<void(const GnfPhi&)> declare_rels = [&](const GnfPhi& f) {
    for (const auto& d : f.disjuncts)
      for (const auto& c : d.conjuncts) {
        declare_extensional(p, c.atom.rel,
                            static_cast<int>(c.atom.vars.size()));
        if (c.sub) declare_rels(*c.sub);
      }
  };
  declare_rels(phi);

  // One predicate per phi-node; rules per disjunct. `incoming` is the
  // parent's guard atom, injected in each rule so head variable pairs are
  // clique-guarded.
  std::function<int(const GnfPhi&, const CqAtomText*)> emit =
      [&](const GnfPhi& node, const CqAtomText* incoming) -> int {
    auto free_sorted_set = free_vars(node);
    std::vector<std::string> head_vars(free_sorted_set.begin(),
                                       free_sorted_set.end());
    int pred;
    if (!incoming) {
      pred = declare_intensional(p, "Goal", 0);
      p.goal_rel = pred;
    } else {
      pred = declare_intensional(
          p, fresh_rel_name(p.rels, "N", name_counter),
          static_cast<int>(head_vars.size()));
    }

    for (const auto& d : node.disjuncts) {
      Rule r;
      std::map<std::string, int> var_ids;
      auto var_of = [&](const std::string& name) {
        auto it = var_ids.find(name);
        if (it != var_ids.end()) return it->second;
        int id = static_cast<int>(r.var_names.size());
        r.var_names.push_back("V" + name);
        var_ids[name] = id;
        return id;
      };
      int fresh_count = 0;
      auto fresh = [&]() {
        int id = static_cast<int>(r.var_names.size());
        r.var_names.push_back("F" + std::to_string(fresh_count++));
        return id;
      };
      r.head.rel = pred;
      for (const auto& v : head_vars) r.head.vars.push_back(var_of(v));

      for (const auto& c : d.conjuncts) {
        RuleAtom guard;
        guard.rel = p.rels.require(c.atom.rel);
        for (const auto& v : c.atom.vars) guard.vars.push_back(var_of(v));
        if (c.kind == GnfPsi::Atom) {
          r.body.push_back({true, std::move(guard)});
          continue;
        }
        int sub_pred = emit(*c.sub, &c.atom);
        auto sub_free = free_vars(*c.sub);
        RuleAtom sub;
        sub.rel = sub_pred;
        for (const auto& v : sub_free) sub.vars.push_back(var_of(v));
        r.body.push_back({true, guard});
        r.body.push_back({c.kind == GnfPsi::Guarded, std::move(sub)});
      }
      if (incoming) {
        // Freshen the positions of the injected guard that are not free in
        // this node.
        RuleAtom inj;
        inj.rel = p.rels.require(incoming->rel);
        std::map<std::string, int> freshened;
        for (const auto& v : incoming->vars) {
          if (free_sorted_set.count(v)) {
            inj.vars.push_back(var_of(v));
          } else {
            auto it = freshened.find(v);
            if (it == freshened.end()) it = freshened.emplace(v, fresh()).first;
            inj.vars.push_back(it->second);
          }
        }
        r.body.push_back({true, std::move(inj)});
      }
      p.rules.push_back(std::move(r));
    }
    return pred;
  };
  emit(phi, nullptr);
  p.check_well_formed();
  return p;
}

}  // namespace cfgd
