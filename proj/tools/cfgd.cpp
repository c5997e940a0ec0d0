// cfgd: compile and evaluate clique-frontier-guarded Datalog on treelike
// instances, with Boolean provenance as stratified cycluits.
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cfgd/engine.hpp"
#include "cfgd/frontends.hpp"
#include "cfgd/oracle.hpp"

using namespace cfgd;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw ValidationError("cannot write " + out_path);
  out << text;
}

struct CommonOpts {
  std::string program_path, instance_path, td_path, td_map_path, out_path;
  std::string format = "json";
  std::string fallback = "naive";
  int treewidth = -1;
  bool stats = false;
};

Program load_program(const CommonOpts& o) {
  return parse_program(slurp(o.program_path));
}

Instance load_instance(const CommonOpts& o) {
  return parse_instance(slurp(o.instance_path));
}

PipelineConfig make_config(const CommonOpts& o, Instance& inst) {
  PipelineConfig cfg;
  if (!o.td_path.empty()) {
    if (o.td_map_path.empty())
      throw ValidationError("--td requires --td-map (vertex-to-element map)");
    cfg.decomposition = read_td(slurp(o.td_path), slurp(o.td_map_path), inst);
  }
  if (o.treewidth >= 0) cfg.treewidth_override = o.treewidth;
  cfg.fallback = o.fallback == "error" ? PipelineConfig::Fallback::Error
                                       : PipelineConfig::Fallback::Naive;
  return cfg;
}

void print_stats(const PipelineStats& s, double wall_ms) {
  std::cerr << "stats: width=" << s.width << " k=" << s.k
            << " encoding_nodes=" << s.encoding_nodes
            << " satwa_states=" << s.satwa_states
            << " satwa_size=" << s.satwa_size << " gates=" << s.gates
            << " wires=" << s.wires << " live_pairs=" << s.live_pairs
            << " wall_ms=" << wall_ms << "\n";
}

void print_guard_report(const char* what, const GuardReport& rep) {
  if (rep.pass) {
    std::cout << what << ": pass\n";
    return;
  }
  std::cout << what << ": fail\n";
  for (const auto& v : rep.violations) {
    std::cout << "  rule " << v.rule << ": variables {" << v.var_a << ","
              << v.var_b << "} not covered by a positive atom";
    if (v.literal >= 0) std::cout << " (negated literal " << v.literal << ")";
    std::cout << "\n";
  }
}

int run(int argc, char** argv) {
  CLI::App app{"CFG-Datalog engine: tree automata and provenance cycluits "
               "over treelike instances"};
  app.require_subcommand(1);
  CommonOpts o;

  auto add_common = [&](CLI::App* cmd, bool wants_instance) {
    cmd->add_option("--program", o.program_path, "Datalog program file");
    if (wants_instance)
      cmd->add_option("--instance", o.instance_path, "fact file");
    cmd->add_option("--td", o.td_path, "tree decomposition (PACE .td)");
    cmd->add_option("--td-map", o.td_map_path, "vertex-to-element map file");
    cmd->add_option("--treewidth", o.treewidth, "encoding width override");
    cmd->add_option("--out", o.out_path, "output file (default stdout)");
    cmd->add_option("--format", o.format, "json|dot")
        ->check(CLI::IsMember({"json", "dot"}));
    cmd->add_option("--fallback", o.fallback,
                    "policy for unguarded negation: naive|error")
        ->check(CLI::IsMember({"naive", "error"}));
    cmd->add_flag("--stats", o.stats, "print pipeline statistics to stderr");
  };

  auto* c_check = app.add_subcommand("check", "CFG and GN guardedness report");
  add_common(c_check, false);
  auto* c_strat = app.add_subcommand("stratify", "print a stratification");
  add_common(c_strat, false);
  auto* c_encode =
      app.add_subcommand("encode", "tree-encode an instance (JSON)");
  add_common(c_encode, true);
  auto* c_compile = app.add_subcommand(
      "compile", "compile to a SATWA and export it eagerly (JSON)");
  add_common(c_compile, false);
  auto* c_eval =
      app.add_subcommand("eval", "evaluate; exit 0 accept, 1 reject");
  add_common(c_eval, true);
  auto* c_prov =
      app.add_subcommand("provenance", "provenance cycluit of the program");
  add_common(c_prov, true);
  auto* c_oracle = app.add_subcommand(
      "oracle", "brute-force provenance truth table (CSV)");
  add_common(c_oracle, true);
  std::string table_path;
  c_oracle->add_option("--table", table_path, "CSV output path");

  auto* c_translate =
      app.add_subcommand("translate", "translate a frontend query");
  c_translate->require_subcommand(1);
  std::string cq_path, regex_text, s2rpq_path, gnf_path, rels_csv;
  auto* t_cq = c_translate->add_subcommand("cq", "conjunctive query");
  t_cq->add_option("--query", cq_path, "CQ file")->required();
  t_cq->add_option("--td", o.td_path, "simplicial decomposition (PACE .td)");
  t_cq->add_option("--td-map", o.td_map_path, "vertex-to-variable map");
  t_cq->add_option("--out", o.out_path, "output file");
  auto* t_rpq =
      c_translate->add_subcommand("rpq", "two-way regular path query");
  t_rpq->add_option("--regex", regex_text, "regex over relations, R- reversed")
      ->required();
  t_rpq->add_option("--rels", rels_csv,
                    "comma-separated binary signature (default: the letters)");
  t_rpq->add_option("--out", o.out_path, "output file");
  auto* t_s2 = c_translate->add_subcommand("sac2rpq", "strongly acyclic C2RPQ");
  t_s2->add_option("--file", s2rpq_path, "one `x y <regex>` edge per line")
      ->required();
  t_s2->add_option("--rels", rels_csv, "comma-separated binary signature");
  t_s2->add_option("--out", o.out_path, "output file");
  auto* t_gnf = c_translate->add_subcommand("gnf", "weak GN-normal-form GNF");
  t_gnf->add_option("--file", gnf_path, "s-expression formula file")
      ->required();
  t_gnf->add_option("--out", o.out_path, "output file");

  CLI11_PARSE(app, argc, argv);
  auto t0 = std::chrono::steady_clock::now();
  auto wall_ms = [&]() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  };

  if (c_check->parsed()) {
    Program p = load_program(o);
    print_guard_report("check_cfg", check_cfg(p));
    print_guard_report("check_gn", check_gn(p));
    std::cout << "body_size: " << body_size(p) << "\n";
    try {
      stratify(p);
      std::cout << "stratifiable: yes\n";
    } catch (const NotStratifiableError& e) {
      std::cout << "stratifiable: no (" << e.what() << ")\n";
    }
    return 0;
  }
  if (c_strat->parsed()) {
    Program p = load_program(o);
    StrataAssignment sa = stratify(p);
    std::ostringstream out;
    for (int r = 0; r < p.rels.size(); r++)
      if (p.is_intensional(r))
        out << p.rels.name(r) << "\t" << sa.strat[r] << "\n";
    emit(o.out_path, out.str());
    return 0;
  }
  if (c_encode->parsed()) {
    Instance i = load_instance(o);
    PipelineConfig cfg = make_config(o, i);
    TreeDecomposition td =
        cfg.decomposition ? *cfg.decomposition : decompose_minfill(i);
    int width = validate_decomposition(i, td);
    int k = cfg.treewidth_override.value_or(width);
    TreeEncoding e = encode(i, td, k);
    emit(o.out_path, encoding_to_json(e) + "\n");
    if (o.stats)
      std::cerr << "stats: width=" << width << " k=" << k
                << " nodes=" << e.nodes.size() << " wall_ms=" << wall_ms()
                << "\n";
    return 0;
  }
  if (c_compile->parsed()) {
    Program p = load_program(o);
    int k = o.treewidth >= 0 ? o.treewidth : 1;
    auto satwa = compile(p, k);
    emit(o.out_path, satwa->export_json() + "\n");
    if (o.stats)
      std::cerr << "stats: states=" << satwa->num_states()
                << " size=" << satwa->measured_size()
                << " wall_ms=" << wall_ms() << "\n";
    return 0;
  }
  if (c_eval->parsed()) {
    Program p = load_program(o);
    Instance i = load_instance(o);
    PipelineConfig cfg = make_config(o, i);
    PipelineStats stats;
    bool accepted = evaluate(p, i, cfg, &stats);
    if (o.stats) print_stats(stats, wall_ms());
    std::cout << (accepted ? "accept" : "reject") << "\n";
    return accepted ? 0 : 1;
  }
  if (c_prov->parsed()) {
    Program p = load_program(o);
    Instance i = load_instance(o);
    PipelineConfig cfg = make_config(o, i);
    ProvenanceResult prov = query_provenance(p, i, cfg);
    emit(o.out_path, o.format == "dot"
                         ? export_cycluit_dot(prov.cycluit)
                         : export_cycluit_json(prov.cycluit) + "\n");
    if (o.stats) print_stats(prov.stats, wall_ms());
    return 0;
  }
  if (c_oracle->parsed()) {
    Program p = load_program(o);
    Instance i = load_instance(o);
    TruthTable tt = brute_provenance(p, i);
    std::ostringstream out;
    out << "valuation";
    for (const auto& f : tt.fact_order) out << "," << i.fact_to_string(f);
    out << ",accept\n";
    for (uint32_t mask = 0; mask < tt.accept.size(); mask++) {
      out << mask;
      for (size_t f = 0; f < tt.fact_order.size(); f++)
        out << "," << (mask >> f & 1);
      out << "," << int(tt.accept[mask]) << "\n";
    }
    emit(table_path.empty() ? o.out_path : table_path, out.str());
    return 0;
  }
  if (c_translate->parsed()) {
    Program p;
    if (t_cq->parsed()) {
      ConjunctiveQuery q = parse_cq(slurp(cq_path));
      TreeDecomposition td;
      if (!o.td_path.empty()) {
        if (o.td_map_path.empty())
          throw ValidationError("--td requires --td-map");
        // PACE vertices name CQ variables; interning them in variable-id
        // order aligns the ids.
        Instance shim;
        for (const auto& v : q.var_names) shim.intern(v);
        td = read_td(slurp(o.td_path), slurp(o.td_map_path), shim);
      } else {
        td = gyo_join_tree(q);
      }
      p = cq_to_cfg(q, td);
    } else if (t_rpq->parsed() || t_s2->parsed()) {
      std::optional<Signature> sig;
      if (!rels_csv.empty()) {
        Signature s;
        std::istringstream ss(rels_csv);
        std::string rel;
        while (std::getline(ss, rel, ',')) s.declare(rel, 2);
        sig = s;
      }
      p = t_rpq->parsed()
              ? rpq_to_cfg(parse_rpq(regex_text), sig)
              : sac2rpq_to_cfg(parse_sac2rpq(slurp(s2rpq_path)), sig);
    } else {
      p = gnf_to_cfg(parse_gnf(slurp(gnf_path)));
    }
    emit(o.out_path,
         serialize_program(p) + "% body_size=" + std::to_string(body_size(p)) +
             "\n");
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
