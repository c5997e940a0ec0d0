#include "cfgd/oracle.hpp"

#include <algorithm>
#include <cassert>
#include <random>

namespace cfgd {

TruthTable brute_provenance(const Program& p, const Instance& i) {
  int n = i.size();
  if (n > 20)
    throw ValidationError("brute_provenance: instance too large (" +
                          std::to_string(n) + " facts, cap 20)");
  StrataAssignment sa = stratify(p);
  std::vector<int> full_domain = i.active_domain();
  TruthTable tt;
  tt.fact_order = i.facts();
  tt.accept.resize(1u << n);
  for (uint32_t mask = 0; mask < (1u << n); mask++) {
    Instance sub(i.sig());
    for (int e = 0; e < i.num_elements(); e++)
      sub.intern(i.element_name(e));  // keep element ids aligned
    for (int f = 0; f < n; f++)
      if (mask >> f & 1) sub.add_fact(i.facts()[f].rel, i.facts()[f].args);
    tt.accept[mask] = naive_eval(p, sub, full_domain, sa).goal;
  }
  return tt;
}

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

}  // namespace

Program gen_pn(int i) {
  if (i < 1) throw ValidationError("gen_pn requires i >= 1");
  Program p;
  int rel_r = declare_extensional(p, "R", 2);
  int rel_g = declare_extensional(p, "G", 2);
  std::vector<int> rel_ri(i + 1);
  for (int j = 0; j <= i; j++)
    rel_ri[j] = declare_intensional(p, "R_" + std::to_string(j), 2);
  int goal = declare_intensional(p, "Goal", 0);

  {
    Rule r0;
    r0.var_names = {"X", "Y"};
    r0.head = {rel_ri[0], {0, 1}};
    r0.body.push_back({true, {rel_r, {0, 1}}});
    p.rules.push_back(std::move(r0));
  }
  for (int j = 1; j <= i; j++) {
    Rule r;
    r.var_names = {"X", "Y", "Z"};
    r.head = {rel_ri[j], {0, 1}};
    r.body.push_back({true, {rel_g, {0, 1}}});
    r.body.push_back({true, {rel_ri[j - 1], {0, 2}}});
    r.body.push_back({true, {rel_ri[j - 1], {2, 1}}});
    p.rules.push_back(std::move(r));
  }
  {
    Rule rg;
    rg.var_names = {"X", "Y"};
    rg.head = {goal, {}};
    rg.body.push_back({true, {rel_ri[i], {0, 1}}});
    p.rules.push_back(std::move(rg));
  }
  p.goal_rel = goal;
  p.check_well_formed();
  return p;
}

GeneratedInstance gen_pn_instance(int i) {
  if (i < 1 || i > 16) throw ValidationError("gen_pn_instance: 1 <= i <= 16");
  GeneratedInstance out;
  Instance& inst = out.instance;
  inst.sig().declare("R", 2);
  inst.sig().declare("G", 2);
  int len = 1 << i;
  std::vector<int> node(len + 1);
  for (int m = 0; m <= len; m++)
    node[m] = inst.intern("n" + std::to_string(m));
  for (int m = 0; m < len; m++)
    inst.add_fact("R", {inst.element_name(node[m]),
                        inst.element_name(node[m + 1])});
  for (int j = 1; j <= i; j++)
    for (int m = 0; (m + 1) << j <= len; m++)
      inst.add_fact("G", {inst.element_name(node[m << j]),
                          inst.element_name(node[(m + 1) << j])});

  // Interval decomposition: bag {l, mid, r} per dyadic interval.
  struct Item {
    int l, r, parent;
  };
  std::vector<Item> stack{{0, len, -1}};
  while (!stack.empty()) {
    auto [l, r, parent] = stack.back();
    stack.pop_back();
    if (r - l == 1) {
      out.td.add_bag({node[l], node[r]}, parent);
      continue;
    }
    int mid = (l + r) / 2;
    int b = out.td.add_bag({node[l], node[mid], node[r]}, parent);
    stack.push_back({mid, r, b});
    stack.push_back({l, mid, b});
  }
  return out;
}

Signature oracle_signature() {
  Signature sig;
  sig.declare("E", 2);
  sig.declare("F", 2);
  sig.declare("U", 1);
  sig.declare("V", 1);
  return sig;
}

Program random_gn_program(uint64_t seed, int body_size_cap) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int n) { return static_cast<int>(rng() % n); };

  Program p;
  Signature ext = oracle_signature();
  std::vector<int> ext_ids;
  for (int r = 0; r < ext.size(); r++)
    ext_ids.push_back(declare_extensional(p, ext.name(r), ext.arity(r)));

  int n_int = 1 + pick(3);  // intensional relations below Goal
  struct IntRel {
    int id;
    int arity;
    int stratum;
  };
  std::vector<IntRel> ints;
  for (int i = 0; i < n_int; i++) {
    int arity = 1 + pick(2);
    int stratum = 1 + (i > 0 ? pick(i + 1) : 0);
    ints.push_back({declare_intensional(p, "I" + std::to_string(i), arity),
                    arity, stratum});
  }
  int goal_stratum = 1;
  for (const auto& ir : ints) goal_stratum = std::max(goal_stratum, ir.stratum);
  int goal = declare_intensional(p, "Goal", 0);

  int max_atoms = std::max(2, body_size_cap / 2);  // program arity is 2

  auto build_rule = [&](int head_rel, int head_arity, int stratum) {
    Rule r;
    auto fresh_var = [&]() {
      int v = static_cast<int>(r.var_names.size());
      r.var_names.push_back("V" + std::to_string(v));
      return v;
    };
    for (int i = 0; i < head_arity; i++) r.head.vars.push_back(fresh_var());
    r.head.rel = head_rel;

    // Guard: a positive extensional atom covering the head variables.
    if (head_arity == 2) {
      int rel = ext_ids[pick(2)];  // E or F
      r.body.push_back({true, {rel, {r.head.vars[0], r.head.vars[1]}}});
    } else if (head_arity == 1) {
      if (pick(2) == 0) {
        r.body.push_back({true, {ext_ids[2 + pick(2)], {r.head.vars[0]}}});
      } else {
        int other = fresh_var();
        bool flip = pick(2) == 0;
        r.body.push_back({true,
                          {ext_ids[pick(2)],
                           flip ? std::vector<int>{other, r.head.vars[0]}
                                : std::vector<int>{r.head.vars[0], other}}});
      }
    } else {
      int a = fresh_var(), b = fresh_var();
      r.body.push_back({true, {ext_ids[pick(2)], {a, b}}});
    }

    int extra = pick(max_atoms - 1 + 1);
    for (int e = 0; e < extra && static_cast<int>(r.body.size()) < max_atoms;
         e++) {
      auto pool = [&]() {
        // Reuse an existing variable or mint a fresh one.
        if (pick(3) == 0) return fresh_var();
        return pick(static_cast<int>(r.var_names.size()));
      };
      int kind = pick(4);
      if (kind == 0) {
        int rel = ext_ids[pick(2)];
        int a = pool(), b = pool();
        r.body.push_back({true, {rel, {a, b}}});
      } else if (kind == 1) {
        r.body.push_back({true, {ext_ids[2 + pick(2)], {pool()}}});
      } else if (kind == 2) {
        // Positive intensional atom of stratum <= this one.
        std::vector<int> ok;
        for (size_t ii = 0; ii < ints.size(); ii++)
          if (ints[ii].stratum <= stratum && ints[ii].id != head_rel)
            ok.push_back(static_cast<int>(ii));
        if (ok.empty()) continue;
        const auto& ir = ints[ok[pick(static_cast<int>(ok.size()))]];
        std::vector<int> vars;
        for (int a = 0; a < ir.arity; a++) vars.push_back(pool());
        r.body.push_back({true, {ir.id, vars}});
      } else {
        // Negative intensional literal of strictly lower stratum, with
        // variables drawn from one positive atom so pairs stay guarded.
        std::vector<int> ok;
        for (size_t ii = 0; ii < ints.size(); ii++)
          if (ints[ii].stratum < stratum) ok.push_back(static_cast<int>(ii));
        if (ok.empty()) continue;
        const auto& ir = ints[ok[pick(static_cast<int>(ok.size()))]];
        const auto& host = r.body[pick(static_cast<int>(r.body.size()))];
        if (!host.positive) continue;
        std::vector<int> vars;
        for (int a = 0; a < ir.arity; a++)
          vars.push_back(
              host.atom.vars[pick(static_cast<int>(host.atom.vars.size()))]);
        r.body.push_back({false, {ir.id, vars}});
      }
    }
    return r;
  };

  for (size_t ii = 0; ii < ints.size(); ii++) {
    int n_rules = 1 + pick(2);
    for (int k = 0; k < n_rules; k++)
      p.rules.push_back(
          build_rule(ints[ii].id, ints[ii].arity, ints[ii].stratum));
    // Optional recursive rule: I(x) <- I(y), E(y,x).
    if (ints[ii].arity == 1 && pick(2) == 0) {
      Rule r;
      r.var_names = {"V0", "V1"};
      r.head = {ints[ii].id, {0}};
      r.body.push_back({true, {ints[ii].id, {1}}});
      r.body.push_back({true, {ext_ids[pick(2)], {1, 0}}});
      p.rules.push_back(std::move(r));
    }
  }
  p.rules.push_back(build_rule(goal, 0, goal_stratum + 1));
  p.goal_rel = goal;
  p.check_well_formed();
  assert(check_cfg(p).pass && check_gn(p).pass);
  assert(body_size(p) <= body_size_cap);
  stratify(p);
  return p;
}

GeneratedInstance random_tw_instance(uint64_t seed, int width,
                                     int target_facts, const Signature* sig) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int n) { return static_cast<int>(rng() % n); };
  Signature s = sig ? *sig : oracle_signature();

  GeneratedInstance out;
  Instance& inst = out.instance;
  for (int r = 0; r < s.size(); r++) inst.sig().declare(s.name(r), s.arity(r));

  int next_elem = 0;
  auto fresh = [&]() {
    return inst.intern("v" + std::to_string(next_elem++));
  };

  struct BagInfo {
    int id;
    std::vector<int> elems;
  };
  std::vector<BagInfo> bags;
  {
    std::vector<int> elems;
    for (int j = 0; j < width + 1; j++) elems.push_back(fresh());
    bags.push_back({out.td.add_bag(elems, -1), elems});
  }

  auto add_facts_for = [&](const std::vector<int>& elems) {
    int n = 1 + pick(2);
    for (int f = 0; f < n && inst.size() < target_facts; f++) {
      int rel = pick(s.size());
      std::vector<std::string> args;
      for (int a = 0; a < s.arity(rel); a++)
        args.push_back(
            inst.element_name(elems[pick(static_cast<int>(elems.size()))]));
      inst.add_fact(s.name(rel), args);
    }
  };

  add_facts_for(bags[0].elems);
  while (inst.size() < target_facts) {
    const BagInfo& parent = bags[pick(static_cast<int>(bags.size()))];
    int keep = 1 + pick(width);  // 1..width shared elements
    std::vector<int> elems = parent.elems;
    std::shuffle(elems.begin(), elems.end(), rng);
    elems.resize(std::min<size_t>(keep, elems.size()));
    while (static_cast<int>(elems.size()) < width + 1) elems.push_back(fresh());
    BagInfo child{out.td.add_bag(elems, parent.id), elems};
    bags.push_back(child);
    add_facts_for(child.elems);
  }
  validate_decomposition(inst, out.td);
  return out;
}

}  // namespace cfgd
