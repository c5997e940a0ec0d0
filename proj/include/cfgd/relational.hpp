#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cfgd {

// Error carrying an input position, thrown by the parsers in this project.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ", col " +
                           std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
  int line;
  int col;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Relation names interned to dense ids, each with a fixed arity.
class Signature {
 public:
  // Declares a relation, or checks the arity if already known.
  // Arities must be >= 1 unless zero_ary_ok (intensional goal predicates).
  int declare(const std::string& name, int arity, bool zero_ary_ok = false);
  int id_of(const std::string& name) const;  // -1 if unknown
  int require(const std::string& name) const;
  bool has(const std::string& name) const { return id_of(name) >= 0; }
  int arity(int rel) const { return arities_[rel]; }
  const std::string& name(int rel) const { return names_[rel]; }
  int size() const { return static_cast<int>(names_.size()); }
  int max_arity() const;
  bool operator==(const Signature& o) const {
    return names_ == o.names_ && arities_ == o.arities_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<int> arities_;
  std::unordered_map<std::string, int> index_;
};

struct Fact {
  int rel = -1;
  std::vector<int> args;  // interned element ids

  friend bool operator==(const Fact& a, const Fact& b) {
    return a.rel == b.rel && a.args == b.args;
  }
  friend auto operator<=>(const Fact& a, const Fact& b) = default;
};

// A finite set of facts over a signature. Element names are interned to
// dense ints. Immutable once built (the builders below add facts, the
// query API is const).
class Instance {
 public:
  Instance() = default;
  explicit Instance(Signature sig) : sig_(std::move(sig)) {}

  Signature& sig() { return sig_; }
  const Signature& sig() const { return sig_; }

  int intern(const std::string& element);
  int element_id(const std::string& element) const;  // -1 if unknown
  const std::string& element_name(int id) const { return elem_names_[id]; }
  int num_elements() const { return static_cast<int>(elem_names_.size()); }

  // Set semantics: duplicates are merged silently.
  void add_fact(int rel, std::vector<int> args);
  void add_fact(const std::string& rel, const std::vector<std::string>& args);
  bool has_fact(const Fact& f) const { return fact_set_.count(f) > 0; }

  const std::vector<Fact>& facts() const { return facts_; }
  int size() const { return static_cast<int>(facts_.size()); }

  // Elements occurring in at least one fact.
  std::vector<int> active_domain() const;

  std::string fact_to_string(const Fact& f) const;

 private:
  Signature sig_;
  std::vector<std::string> elem_names_;
  std::unordered_map<std::string, int> elem_index_;
  std::vector<Fact> facts_;
  std::map<Fact, bool> fact_set_;
};

// Fact file grammar: one fact per line, `Rel(a1,...,ak).`, `%` comments,
// blank lines ignored. When `sig` is given it is authoritative: unknown
// relations and arity mismatches are errors. Otherwise first use fixes
// the arity.
Instance parse_instance(const std::string& text,
                        const std::optional<Signature>& sig = std::nullopt);

std::string serialize_instance(const Instance& inst);

// Backtracking search for a fact-preserving bijection between the two
// active domains. Intended for small instances; throws ValidationError
// when an instance has more than `max_dom` elements.
bool are_isomorphic(const Instance& a, const Instance& b, int max_dom = 20);

}  // namespace cfgd
