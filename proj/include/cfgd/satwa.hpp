#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cfgd/datalog.hpp"
#include "cfgd/treewidth.hpp"

namespace cfgd {

// A Gamma^k_sigma symbol: a set d of D_k names plus at most one fact over d.
struct Label {
  uint32_t d = 0;
  std::optional<EncFact> fact;

  friend bool operator==(const Label&, const Label&) = default;
};

Label label_of(const TreeEncoding& e, int node);
inline Label strip_fact(const Label& l) { return Label{l.d, std::nullopt}; }

// Transition formulas: AND/OR trees over state literals, negation only on
// leaves. Shared immutable nodes.
struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum Kind : uint8_t { True, False, Lit, NLit, And, Or } kind;
  int state = -1;
  std::vector<FormulaPtr> kids;

  int64_t size() const;
};

FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr f_lit(int state);
FormulaPtr f_nlit(int state);
// Builders fold constants and collapse singletons.
FormulaPtr f_and(std::vector<FormulaPtr> kids);
FormulaPtr f_or(std::vector<FormulaPtr> kids);

std::string formula_to_string(const Formula& f,
                              const std::function<std::string(int)>& name);

// Stratified isotropic alternating two-way automaton over Labels. States
// are dense ints; implementations may create states lazily inside delta,
// so num_states() is monotonically growing.
class Satwa {
 public:
  virtual ~Satwa() = default;
  virtual int initial_state() = 0;
  virtual int num_states() const = 0;
  virtual int stratum(int q) const = 0;
  virtual FormulaPtr delta(int q, const Label& l) = 0;
  virtual std::string state_name(int q) const {
    return "q" + std::to_string(q);
  }
};

// SATWA over Gamma x {0,1} (annotated trees).
class AnnotatedSatwa {
 public:
  virtual ~AnnotatedSatwa() = default;
  virtual int initial_state() = 0;
  virtual int stratum(int q) const = 0;
  virtual FormulaPtr delta(int q, const Label& l, bool ann) = 0;
  virtual std::string state_name(int q) const {
    return "q" + std::to_string(q);
  }
};

// Lifting: delta'(q, (l,1)) = delta(q, l) and delta'(q, (l,0)) =
// delta(q, l with the fact removed).
class LiftedSatwa : public AnnotatedSatwa {
 public:
  explicit LiftedSatwa(Satwa& base) : base_(base) {}
  int initial_state() override { return base_.initial_state(); }
  int stratum(int q) const override { return base_.stratum(q); }
  FormulaPtr delta(int q, const Label& l, bool ann) override {
    return base_.delta(q, ann ? l : strip_fact(l));
  }
  std::string state_name(int q) const override { return base_.state_name(q); }

 private:
  Satwa& base_;
};

// Partial valuation of a rule's variables into D_k, with an undefined
// sentinel. Values are D_k indices.
struct PartialValuation {
  static constexpr uint8_t kUndef = 0xff;
  std::vector<uint8_t> val;  // indexed by rule-local variable id

  bool defined(int v) const { return val[v] != kUndef; }
  bool total_on(const std::vector<int>& vars) const {
    for (int v : vars)
      if (!defined(v)) return false;
    return true;
  }
  friend bool operator==(const PartialValuation&, const PartialValuation&) =
      default;
};

// Hom_{y,x}(nu): the unique homomorphism from tuple y to nu(x), respecting
// repeated variables, or nullopt on conflict. Both tuples index into the
// same variable space; nu must be total on x.
std::optional<PartialValuation> hom(const std::vector<int>& y,
                                    const std::vector<int>& x,
                                    const PartialValuation& nu, int num_vars);

// Compiles a CFG-Datalog program with guarded negation into a SATWA testing
// it on instances of treewidth <= k_inst. States are instantiated lazily;
// transition formulas are memoized per (state, label).
class CompiledSatwa;

class NotGuardedError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

std::unique_ptr<CompiledSatwa> compile(const Program& p, int k_inst);

class CompiledSatwa : public Satwa {
 public:
  int initial_state() override;
  int num_states() const override;
  int stratum(int q) const override;
  FormulaPtr delta(int q, const Label& l) override;
  std::string state_name(int q) const override;

  const Program& program() const;
  int k_inst() const;
  // states + total size of all distinct memoized transition formulas
  int64_t measured_size() const;

  // Enumerates every label of Gamma^k_sigma over the program's extensional
  // signature and instantiates all states reachable from the initial one.
  // Exponential in k; intended for conformance inspection on small inputs.
  std::vector<Label> enumerate_alphabet() const;
  void eager_instantiate();
  std::string export_json();

  ~CompiledSatwa() override;
  struct Impl;

 private:
  friend std::unique_ptr<CompiledSatwa> compile(const Program&, int);
  explicit CompiledSatwa(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

// Renumbers the encoding's fact relations by name into the program's
// relation ids, which is the numbering compiled automata read. Facts over
// relations the program does not mention keep a sentinel id that matches
// no atom.
TreeEncoding align_encoding(const TreeEncoding& e, const Program& p);

// Decides acceptance by building the provenance cycluit of the lifted
// automaton and evaluating it under the all-ones valuation.
bool satwa_accepts(Satwa& a, const TreeEncoding& t);
// Aligns the encoding to the compiled program's relation ids first.
bool satwa_accepts(CompiledSatwa& a, const TreeEncoding& t);

}  // namespace cfgd
