#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cfgd/relational.hpp"

namespace cfgd {

// Variables are interned per rule (ids 0..num_vars-1).
struct RuleAtom {
  int rel = -1;
  std::vector<int> vars;
};

struct RuleLiteral {
  bool positive = true;
  RuleAtom atom;
};

struct Rule {
  RuleAtom head;
  std::vector<RuleLiteral> body;
  std::vector<std::string> var_names;
  int num_vars() const { return static_cast<int>(var_names.size()); }
};

// Stratified Datalog program. A single relation table holds both the
// extensional and the intensional signature; relations that occur in some
// head are intensional, Goal is the 0-ary goal predicate.
class Program {
 public:
  Signature rels;                  // arity 0 allowed for intensional only
  std::vector<char> intensional;   // per relation id
  std::vector<Rule> rules;
  int goal_rel = -1;

  bool is_intensional(int rel) const { return intensional[rel]; }
  std::vector<int> rules_with_head(int rel) const;
  // max(ar(sigma), ar(sigma_int)) over relations occurring in the program
  int arity() const { return rels.max_arity(); }
  Signature extensional_signature() const;
  void check_well_formed() const;  // head vars in body, negation intensional
};

// Grammar: `Head(X,Y) :- Lit1(..), not Lit2(..), ... .`, one rule per
// statement, `%` comments. Variables are uppercase-initial, constants are
// not allowed. Relations in heads become intensional.
Program parse_program(const std::string& text);
std::string serialize_program(const Program& p);

// strat: intensional relation id -> stratum in {1..n} (extensional ids map
// to 0). Any valid stratification is acceptable.
struct StrataAssignment {
  std::vector<int> strat;  // indexed by relation id
  int num_strata = 0;      // max stratum
};

class NotStratifiableError : public ValidationError {
 public:
  NotStratifiableError(const std::string& msg, std::vector<int> cycle)
      : ValidationError(msg), cycle(std::move(cycle)) {}
  std::vector<int> cycle;  // relation ids on a negative cycle
};

StrataAssignment stratify(const Program& p);

// Checks conditions (i)-(iii) of stratified semantics; used by tests as an
// independent validator and by naive_eval on externally supplied strata.
void check_stratification(const Program& p, const StrataAssignment& s);

// max body atom count x program arity
int body_size(const Program& p);

struct GuardViolation {
  int rule = -1;
  int literal = -1;  // -1 for head frontier violations
  std::string var_a, var_b;
};

struct GuardReport {
  bool pass = true;
  std::vector<GuardViolation> violations;
};

// Every pair of distinct head variables must co-occur in a positive body
// atom. Reports all violations.
GuardReport check_cfg(const Program& p);
// Every negative literal's variable pairs must co-occur in positive body
// atoms of the same rule.
GuardReport check_gn(const Program& p);

// Derived facts of p on inst (intensional relations only), by stratum-wise
// naive fixpoint of the immediate consequence operator. Valuations range
// over `domain` when given (used for subinstance semantics), else over the
// active domain of inst.
struct EvalResult {
  std::vector<Fact> derived;  // over p.rels ids
  bool goal = false;
};

EvalResult naive_eval(const Program& p, const Instance& inst,
                      const std::optional<std::vector<int>>& domain = std::nullopt,
                      const std::optional<StrataAssignment>& strata = std::nullopt);

// Maps extensional relation names of p onto the instance signature;
// throws if an extensional relation is missing or has the wrong arity.
// (Relations absent from the instance are treated as empty.)
std::vector<int> map_program_relations(const Program& p, const Instance& inst);

}  // namespace cfgd
