#include "cfgd/relational.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

namespace cfgd {

int Signature::declare(const std::string& name, int arity, bool zero_ary_ok) {
  if (arity < (zero_ary_ok ? 0 : 1))
    throw ValidationError("relation " + name + " declared with arity " +
                          std::to_string(arity));
  auto it = index_.find(name);
  if (it != index_.end()) {
    if (arities_[it->second] != arity)
      throw ValidationError("relation " + name + " redeclared with arity " +
                            std::to_string(arity) + " (was " +
                            std::to_string(arities_[it->second]) + ")");
    return it->second;
  }
  int id = static_cast<int>(names_.size());
  names_.push_back(name);
  arities_.push_back(arity);
  index_[name] = id;
  return id;
}

int Signature::id_of(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

int Signature::require(const std::string& name) const {
  int id = id_of(name);
  if (id < 0) throw ValidationError("unknown relation " + name);
  return id;
}

int Signature::max_arity() const {
  int m = 0;
  for (int a : arities_) m = std::max(m, a);
  return m;
}

int Instance::intern(const std::string& element) {
  auto it = elem_index_.find(element);
  if (it != elem_index_.end()) return it->second;
  int id = static_cast<int>(elem_names_.size());
  elem_names_.push_back(element);
  elem_index_[element] = id;
  return id;
}

int Instance::element_id(const std::string& element) const {
  auto it = elem_index_.find(element);
  return it == elem_index_.end() ? -1 : it->second;
}

void Instance::add_fact(int rel, std::vector<int> args) {
  if (static_cast<int>(args.size()) != sig_.arity(rel))
    throw ValidationError("arity mismatch for " + sig_.name(rel));
  Fact f{rel, std::move(args)};
  if (fact_set_.emplace(f, true).second) facts_.push_back(std::move(f));
}

void Instance::add_fact(const std::string& rel,
                        const std::vector<std::string>& args) {
  int r = sig_.has(rel) ? sig_.id_of(rel)
                        : sig_.declare(rel, static_cast<int>(args.size()));
  std::vector<int> ids;
  ids.reserve(args.size());
  for (const auto& a : args) ids.push_back(intern(a));
  add_fact(r, std::move(ids));
}

std::vector<int> Instance::active_domain() const {
  std::vector<char> seen(elem_names_.size(), 0);
  for (const auto& f : facts_)
    for (int a : f.args) seen[a] = 1;
  std::vector<int> dom;
  for (int i = 0; i < static_cast<int>(seen.size()); i++)
    if (seen[i]) dom.push_back(i);
  return dom;
}

std::string Instance::fact_to_string(const Fact& f) const {
  std::string s = sig_.name(f.rel) + "(";
  for (size_t i = 0; i < f.args.size(); i++) {
    if (i) s += ",";
    s += elem_names_[f.args[i]];
  }
  return s + ")";
}

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct LineScanner {
  const std::string& s;
  int line;
  size_t pos = 0;
  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) pos++;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(line, static_cast<int>(pos) + 1, msg);
  }
  bool done() {
    skip_ws();
    return pos >= s.size() || s[pos] == '%';
  }
  char peek() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of line");
    return s[pos];
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    pos++;
  }
  std::string ident() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && ident_char(s[pos])) pos++;
    if (pos == start) fail("expected identifier");
    return s.substr(start, pos - start);
  }
};

}  // namespace

Instance parse_instance(const std::string& text,
                        const std::optional<Signature>& sig) {
  const bool strict = sig.has_value();
  Instance inst(strict ? *sig : Signature());
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    lineno++;
    LineScanner sc{raw, lineno};
    while (!sc.done()) {
    std::string rel = sc.ident();
    sc.expect('(');
    std::vector<std::string> args;
    if (sc.peek() != ')') {
      for (;;) {
        args.push_back(sc.ident());
        if (sc.peek() == ',') {
          sc.pos++;
          continue;
        }
        break;
      }
    }
    sc.expect(')');
    sc.expect('.');
    if (args.empty()) sc.fail("facts must have at least one argument");
    if (strict) {
      if (!inst.sig().has(rel))
        throw ParseError(lineno, 1, "unknown relation " + rel);
      if (inst.sig().arity(inst.sig().id_of(rel)) !=
          static_cast<int>(args.size()))
        throw ParseError(
            lineno, 1,
            "arity mismatch for " + rel + ": got " +
                std::to_string(args.size()) + ", declared " +
                std::to_string(inst.sig().arity(inst.sig().id_of(rel))));
    } else if (inst.sig().has(rel) &&
               inst.sig().arity(inst.sig().id_of(rel)) !=
                   static_cast<int>(args.size())) {
      throw ParseError(lineno, 1,
                       "arity mismatch for " + rel + ": got " +
                           std::to_string(args.size()) + ", first use had " +
                           std::to_string(inst.sig().arity(inst.sig().id_of(rel))));
    }
    inst.add_fact(rel, args);
    }
  }
  return inst;
}

std::string serialize_instance(const Instance& inst) {
  std::string out;
  for (const auto& f : inst.facts()) out += inst.fact_to_string(f) + ".\n";
  return out;
}

namespace {

// Per-element fingerprint: multiset of (relation, position) occurrences.
std::vector<std::vector<int>> element_profiles(const Instance& i, int n_elems) {
  std::vector<std::vector<int>> prof(n_elems);
  for (const auto& f : i.facts())
    for (size_t p = 0; p < f.args.size(); p++)
      prof[f.args[p]].push_back(f.rel * 64 + static_cast<int>(p));
  for (auto& v : prof) std::sort(v.begin(), v.end());
  return prof;
}

struct IsoSearch {
  const Instance& a;
  const Instance& b;
  std::vector<int> dom_a, dom_b;
  std::vector<int> map_ab;   // element of a -> element of b or -1
  std::vector<char> used_b;

  bool facts_consistent(int ea) const {
    // Check all facts of `a` whose arguments are fully mapped.
    for (const auto& f : a.facts()) {
      bool touches = false, total = true;
      for (int x : f.args) {
        if (x == ea) touches = true;
        if (map_ab[x] < 0) total = false;
      }
      if (!touches || !total) continue;
      Fact g{f.rel, {}};
      g.args.reserve(f.args.size());
      for (int x : f.args) g.args.push_back(map_ab[x]);
      if (!b.has_fact(g)) return false;
    }
    return true;
  }

  bool extend(size_t idx, const std::vector<std::vector<int>>& pa,
              const std::vector<std::vector<int>>& pb) {
    if (idx == dom_a.size()) return true;
    int ea = dom_a[idx];
    for (int eb : dom_b) {
      if (used_b[eb] || pa[ea] != pb[eb]) continue;
      map_ab[ea] = eb;
      used_b[eb] = 1;
      if (facts_consistent(ea) && extend(idx + 1, pa, pb)) return true;
      map_ab[ea] = -1;
      used_b[eb] = 0;
    }
    return false;
  }
};

}  // namespace

bool are_isomorphic(const Instance& a, const Instance& b, int max_dom) {
  if (a.size() != b.size()) return false;
  auto dom_a = a.active_domain(), dom_b = b.active_domain();
  if (dom_a.size() != dom_b.size()) return false;
  if (static_cast<int>(dom_a.size()) > max_dom)
    throw ValidationError("are_isomorphic: active domain exceeds limit of " +
                          std::to_string(max_dom) + " elements");
  // Per-relation fact counts must agree (relations matched by name).
  std::map<std::string, int> ca, cb;
  for (const auto& f : a.facts()) ca[a.sig().name(f.rel)]++;
  for (const auto& f : b.facts()) cb[b.sig().name(f.rel)]++;
  if (ca != cb) return false;

  // Map a's relation ids into b's id space for fact lookups.
  Instance b2(b.sig());
  std::vector<int> relmap(a.sig().size(), -1);
  for (int r = 0; r < a.sig().size(); r++)
    relmap[r] = b.sig().id_of(a.sig().name(r));

  // Rebuild `a` with b's relation ids so profiles and lookups line up.
  Instance a2(b.sig());
  for (const auto& f : a.facts()) {
    if (relmap[f.rel] < 0) return false;
    std::vector<std::string> args;
    for (int x : f.args) args.push_back(a.element_name(x));
    a2.add_fact(b.sig().name(relmap[f.rel]), args);
  }

  auto pa = element_profiles(a2, a2.num_elements());
  auto pb = element_profiles(b, b.num_elements());

  IsoSearch search{a2, b, a2.active_domain(), b.active_domain(),
                   std::vector<int>(a2.num_elements(), -1),
                   std::vector<char>(b.num_elements(), 0)};
  return search.extend(0, pa, pb);
}

}  // namespace cfgd
