#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cfgd/datalog.hpp"
#include "cfgd/treewidth.hpp"

namespace cfgd {

// ---------- Conjunctive queries ----------

// Boolean CQ: all variables existential. Variables interned to dense ids.
struct ConjunctiveQuery {
  Signature sig;                // extensional signature of the atoms
  std::vector<RuleAtom> atoms;  // vars index var_names
  std::vector<std::string> var_names;

  int num_vars() const { return static_cast<int>(var_names.size()); }
};

// Atoms `Rel(x,y)` separated by commas and/or newlines; `%` comments.
ConjunctiveQuery parse_cq(const std::string& text);

PrimalGraph cq_primal(const ConjunctiveQuery& q);

class NotAlphaAcyclicError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// GYO reduction; bags of the join tree are the atoms' variable sets
// (a simplicial decomposition of width <= ar(sigma)-1 for alpha-acyclic
// CQs). Element ids of the decomposition are CQ variable ids.
TreeDecomposition gyo_join_tree(const ConjunctiveQuery& q);

// Interface-partition rewriting: same width, still simplicial, and every
// bag ends with degree <= 2^{k+1}.
TreeDecomposition bound_degree(const TreeDecomposition& td);

class NotSimplicialError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct CqTranslationStats {
  int width = 0;
  int max_bag_atoms = 0;    // measured g_sigma(k)
  int max_guard_atoms = 0;  // <= k(k+1)/2
  int f_bound = 0;          // (k+1)(g + 2^{k+1} + k(k+1)/2)
};

// Positive, conjunctive, nonrecursive CFG program equivalent to q, one
// intensional predicate per non-root bag of the (degree-bounded) simplicial
// decomposition td.
Program cq_to_cfg(const ConjunctiveQuery& q, const TreeDecomposition& td,
                  CqTranslationStats* stats = nullptr);

// ---------- Regular path queries ----------

struct RpqLetter {
  std::string rel;
  bool reversed = false;
  friend bool operator==(const RpqLetter&, const RpqLetter&) = default;
};

struct RegexNode {
  enum Kind { Letter, Epsilon, Concat, Union, Star } kind;
  RpqLetter letter;
  std::vector<std::unique_ptr<RegexNode>> kids;
};

// Alphabet Sigma+-: `R` or reversed `R-`; concatenation by juxtaposition
// or `.`, union `|`, Kleene `*`, `eps`, parentheses.
struct RegularPathQuery {
  std::string text;
  std::unique_ptr<RegexNode> ast;
  std::vector<std::string> letters;  // relation names used
};

RegularPathQuery parse_rpq(const std::string& text);

struct Nfa {
  int num_states = 0;
  int initial = -1;
  int final = -1;  // Thompson: exactly one
  struct Edge {
    int from, to;
    std::optional<RpqLetter> letter;  // nullopt = epsilon
  };
  std::vector<Edge> edges;
};

Nfa thompson(const RegularPathQuery& q);
// Reverse language over Sigma+-: transitions reversed, initial/final
// swapped, each letter's direction inverted.
Nfa reverse_nfa(const Nfa& a);

// Monadic program of body size <= 4 equivalent to the Boolean 2RPQ over
// the all-binary signature sig (defaults to the regex's letters).
Program rpq_to_cfg(const RegularPathQuery& q,
                   const std::optional<Signature>& sig = std::nullopt);

class NotStronglyAcyclicError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct Sac2Rpq {
  struct Edge {
    std::string from, to;
    RegularPathQuery rpq;
  };
  std::vector<std::string> vars;
  std::vector<Edge> edges;
};

// One edge per line: `x y <regex>`; single-variable components may be
// declared with `var x`.
Sac2Rpq parse_sac2rpq(const std::string& text);

Program sac2rpq_to_cfg(const Sac2Rpq& q,
                       const std::optional<Signature>& sig = std::nullopt);

// ---------- Guarded negation normal form ----------

class NotNormalFormError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct GnfPhi;

struct CqAtomText {
  std::string rel;
  std::vector<std::string> vars;
};

struct GnfPsi {
  enum Kind { Atom, Guarded, NGuarded } kind;
  CqAtomText atom;  // the atom itself, or the guard
  std::unique_ptr<GnfPhi> sub;
};

struct GnfPhi {
  struct Disjunct {
    std::vector<std::string> exists;
    std::vector<GnfPsi> conjuncts;
  };
  std::vector<Disjunct> disjuncts;
};

// S-expression syntax:
//   phi  := (or disj ...)
//   disj := (exists (x ...) (and psi ...))
//   psi  := (R x y) | (guarded (R x y) phi) | (nguarded (R x y) (not phi))
GnfPhi parse_gnf(const std::string& text);

// Maximum conjunct count over all disjuncts, counting guarded subformulas
// as two conjuncts (guard atom + subformula) plus the enclosing guard
// injected into the subformula's rules.
int gnf_cq_rank(const GnfPhi& phi);

// Nonrecursive program, one intensional predicate per phi-node, one rule
// per disjunct; body size <= ar(sigma) * gnf_cq_rank(phi).
Program gnf_to_cfg(const GnfPhi& phi);

}  // namespace cfgd
