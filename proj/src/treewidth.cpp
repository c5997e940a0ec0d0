#include "cfgd/treewidth.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <functional>
#include <sstream>

#include "json.hpp"

namespace cfgd {

int TreeDecomposition::add_bag(std::vector<int> elems, int parent) {
  std::sort(elems.begin(), elems.end());
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  int id = static_cast<int>(bags.size());
  bags.push_back(Bag{std::move(elems), parent, {}});
  if (parent >= 0)
    bags[parent].children.push_back(id);
  else if (root < 0)
    root = id;
  return id;
}

int TreeDecomposition::width() const {
  int w = 0;
  for (const auto& b : bags) w = std::max(w, static_cast<int>(b.elems.size()));
  return w == 0 ? 0 : w - 1;
}

void PrimalGraph::ensure(int v) {
  if (v >= n) {
    n = v + 1;
    adj.resize(n);
  }
}

void PrimalGraph::add_edge(int u, int v) {
  ensure(std::max(u, v));
  if (u == v) return;
  adj[u].insert(v);
  adj[v].insert(u);
}

PrimalGraph PrimalGraph::of_instance(const Instance& inst) {
  PrimalGraph g;
  if (inst.num_elements() > 0) g.ensure(inst.num_elements() - 1);
  for (const auto& f : inst.facts())
    for (size_t i = 0; i < f.args.size(); i++)
      for (size_t j = i + 1; j < f.args.size(); j++)
        g.add_edge(f.args[i], f.args[j]);
  return g;
}

namespace {

// Bags containing each element, and a subtree-connectedness check: a
// nonempty bag set is a connected subtree iff exactly one member has its
// parent outside the set.
std::vector<std::vector<int>> bags_of_elements(const TreeDecomposition& td,
                                               int n_elems) {
  std::vector<std::vector<int>> where(n_elems);
  for (int b = 0; b < static_cast<int>(td.bags.size()); b++)
    for (int e : td.bags[b].elems)
      if (e >= 0 && e < n_elems) where[e].push_back(b);
  return where;
}

bool bag_contains(const TreeDecomposition::Bag& b, int e) {
  return std::binary_search(b.elems.begin(), b.elems.end(), e);
}

void check_connectedness(const TreeDecomposition& td,
                         const std::vector<std::vector<int>>& where,
                         const std::function<std::string(int)>& elem_name) {
  std::vector<char> in_set(td.bags.size(), 0);
  for (int e = 0; e < static_cast<int>(where.size()); e++) {
    const auto& bs = where[e];
    if (bs.size() <= 1) continue;
    for (int b : bs) in_set[b] = 1;
    int first_root = -1, second_root = -1;
    for (int b : bs) {
      int p = td.bags[b].parent;
      if (p < 0 || !in_set[p]) {
        if (first_root < 0)
          first_root = b;
        else if (second_root < 0)
          second_root = b;
      }
    }
    for (int b : bs) in_set[b] = 0;
    if (second_root >= 0)
      throw ValidationError("disconnected element " + elem_name(e) +
                            ": occurs in bags " + std::to_string(first_root) +
                            " and " + std::to_string(second_root) +
                            " without a connecting path");
  }
}

}  // namespace

int validate_decomposition(const Instance& inst, const TreeDecomposition& td) {
  auto where = bags_of_elements(td, inst.num_elements());
  for (const auto& f : inst.facts()) {
    bool covered = false;
    if (!f.args.empty()) {
      for (int b : where[f.args[0]]) {
        bool all = true;
        for (int a : f.args)
          if (!bag_contains(td.bags[b], a)) {
            all = false;
            break;
          }
        if (all) {
          covered = true;
          break;
        }
      }
    }
    if (!covered)
      throw ValidationError("uncovered fact " + inst.fact_to_string(f));
  }
  check_connectedness(td, where,
                      [&](int e) { return inst.element_name(e); });
  return td.width();
}

int validate_decomposition(const PrimalGraph& g, const TreeDecomposition& td) {
  auto where = bags_of_elements(td, g.n);
  for (int v = 0; v < g.n; v++)
    if (where[v].empty())
      throw ValidationError("vertex " + std::to_string(v) +
                            " appears in no bag");
  for (int u = 0; u < g.n; u++)
    for (int v : g.adj[u]) {
      if (v < u) continue;
      bool covered = false;
      for (int b : where[u])
        if (bag_contains(td.bags[b], v)) {
          covered = true;
          break;
        }
      if (!covered)
        throw ValidationError("uncovered edge {" + std::to_string(u) + "," +
                              std::to_string(v) + "}");
    }
  check_connectedness(td, where, [](int e) { return std::to_string(e); });
  return td.width();
}

TreeDecomposition decompose_minfill(const PrimalGraph& g) {
  int n = g.n;
  TreeDecomposition td;
  if (n == 0) {
    td.add_bag({}, -1);
    return td;
  }
  std::vector<std::set<int>> adj = g.adj;
  adj.resize(n);
  std::vector<char> alive(n, 1);

  auto fill_count = [&](int v) {
    long long missing = 0;
    for (auto it = adj[v].begin(); it != adj[v].end(); ++it)
      for (auto jt = std::next(it); jt != adj[v].end(); ++jt)
        if (!adj[*it].count(*jt)) missing++;
    return missing;
  };

  std::vector<long long> fill(n);
  for (int v = 0; v < n; v++) fill[v] = fill_count(v);

  std::vector<int> elim_order;
  std::vector<std::vector<int>> elim_neighbors(n);
  std::vector<int> elim_pos(n, -1);

  for (int step = 0; step < n; step++) {
    int best = -1;
    for (int v = 0; v < n; v++) {
      if (!alive[v]) continue;
      if (best < 0 || fill[v] < fill[best] ||
          (fill[v] == fill[best] && adj[v].size() < adj[best].size()))
        best = v;
    }
    elim_pos[best] = step;
    elim_order.push_back(best);
    elim_neighbors[best].assign(adj[best].begin(), adj[best].end());

    std::set<int> touched;
    for (int u : elim_neighbors[best])
      for (int w : elim_neighbors[best]) {
        if (u >= w || adj[u].count(w)) continue;
        adj[u].insert(w);
        adj[w].insert(u);
        touched.insert(u);
        touched.insert(w);
        for (int x : adj[u])
          if (alive[x]) touched.insert(x);
        for (int x : adj[w])
          if (alive[x]) touched.insert(x);
      }
    for (int u : elim_neighbors[best]) {
      adj[u].erase(best);
      touched.insert(u);
    }
    adj[best].clear();
    alive[best] = 0;
    for (int v : touched)
      if (alive[v]) fill[v] = fill_count(v);
  }

  // Bag per vertex; parent is the bag of the earliest-eliminated later
  // neighbor. Component roots get chained under the first root.
  std::vector<int> bag_id(n, -1);
  std::vector<int> parent_vertex(n, -1);
  for (int v = 0; v < n; v++) {
    int best = -1;
    for (int u : elim_neighbors[v])
      if (elim_pos[u] > elim_pos[v] && (best < 0 || elim_pos[u] < elim_pos[best]))
        best = u;
    parent_vertex[v] = best;
  }
  // Create bags from the last eliminated vertex down so parents exist first.
  int global_root = -1;
  for (int i = n - 1; i >= 0; i--) {
    int v = elim_order[i];
    std::vector<int> elems = elim_neighbors[v];
    elems.push_back(v);
    int parent_bag = -1;
    if (parent_vertex[v] >= 0)
      parent_bag = bag_id[parent_vertex[v]];
    else if (global_root >= 0)
      parent_bag = global_root;  // disconnected component
    bag_id[v] = td.add_bag(std::move(elems), parent_bag);
    if (global_root < 0) global_root = bag_id[v];
  }
  td.root = global_root;
  return td;
}

TreeDecomposition decompose_minfill(const Instance& inst) {
  PrimalGraph g = PrimalGraph::of_instance(inst);
  if (inst.num_elements() > 0) g.ensure(inst.num_elements() - 1);
  return decompose_minfill(g);
}

bool check_simplicial(const PrimalGraph& g, const TreeDecomposition& td) {
  validate_decomposition(g, td);
  for (int b = 0; b < static_cast<int>(td.bags.size()); b++) {
    int p = td.bags[b].parent;
    if (p < 0) continue;
    std::vector<int> inter;
    std::set_intersection(td.bags[b].elems.begin(), td.bags[b].elems.end(),
                          td.bags[p].elems.begin(), td.bags[p].elems.end(),
                          std::back_inserter(inter));
    for (size_t i = 0; i < inter.size(); i++)
      for (size_t j = i + 1; j < inter.size(); j++)
        if (!g.has_edge(inter[i], inter[j])) return false;
  }
  return true;
}

int TreeEncoding::add_node(uint32_t d, std::optional<EncFact> fact) {
  nodes.push_back(Node{d, std::move(fact), -1, -1, -1});
  return static_cast<int>(nodes.size()) - 1;
}

void validate_encoding(const TreeEncoding& e) {
  if (e.root < 0 || e.root >= static_cast<int>(e.nodes.size()))
    throw ValidationError("encoding has no root");
  if (e.domain_size() > 30) throw ValidationError("k too large");
  int seen = 0;
  std::deque<int> queue{e.root};
  while (!queue.empty()) {
    int id = queue.front();
    queue.pop_front();
    seen++;
    const auto& n = e.nodes[id];
    int deg = (n.left >= 0) + (n.right >= 0);
    if (deg == 1)
      throw ValidationError("node " + std::to_string(id) +
                            " has exactly one child (tree must be full)");
    if (__builtin_popcount(n.d) > e.k + 1)
      throw ValidationError("node " + std::to_string(id) +
                            " has more than k+1 names");
    if (n.d >> e.domain_size())
      throw ValidationError("node " + std::to_string(id) +
                            " uses a name outside D_k");
    if (n.fact) {
      if (n.fact->rel < 0 || n.fact->rel >= e.sig.size())
        throw ValidationError("node fact has unknown relation");
      if (static_cast<int>(n.fact->args.size()) != e.sig.arity(n.fact->rel))
        throw ValidationError("node fact arity mismatch");
      for (uint8_t a : n.fact->args)
        if (!(n.d >> a & 1))
          throw ValidationError("malformed label: fact argument " +
                                TreeEncoding::dk_name(a) +
                                " not in node domain");
    }
    if (n.left >= 0) queue.push_back(n.left);
    if (n.right >= 0) queue.push_back(n.right);
  }
  if (seen != static_cast<int>(e.nodes.size()))
    throw ValidationError("encoding contains unreachable nodes");
}

TreeEncoding encode(const Instance& inst, const TreeDecomposition& td, int k) {
  int width = validate_decomposition(inst, td);
  if (2 * k + 2 > 30) throw ValidationError("k too large (max 14)");
  if (width > k)
    throw ValidationError("width-exceeds-k: decomposition width " +
                          std::to_string(width) + " > " + std::to_string(k));

  TreeEncoding enc;
  enc.k = k;
  enc.sig = inst.sig();

  if (td.empty()) {
    enc.root = enc.add_node(0, std::nullopt);
    enc.node_fact.assign(1, -1);
    return enc;
  }

  int nbags = static_cast<int>(td.bags.size());

  // BFS order and per-bag depth.
  std::vector<int> order;
  std::vector<int> depth(nbags, 0);
  order.reserve(nbags);
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

  // Each fact goes to its topmost covering bag (smallest depth, then
  // smallest BFS index).
  auto where = bags_of_elements(td, inst.num_elements());
  std::vector<std::vector<int>> facts_of(nbags);
  std::vector<int> bfs_index(nbags, 0);
  for (int i = 0; i < nbags; i++) bfs_index[order[i]] = i;
  for (int fi = 0; fi < inst.size(); fi++) {
    const Fact& f = inst.facts()[fi];
    int best = -1;
    for (int b : where[f.args[0]]) {
      bool all = true;
      for (int a : f.args)
        if (!bag_contains(td.bags[b], a)) {
          all = false;
          break;
        }
      if (!all) continue;
      if (best < 0 || depth[b] < depth[best] ||
          (depth[b] == depth[best] && bfs_index[b] < bfs_index[best]))
        best = b;
    }
    facts_of[best].push_back(fi);
  }

  // Name assignment: elements shared with the parent bag keep their name;
  // fresh elements take the smallest name unused in the parent's label and
  // the current label. |D_k| = 2k+2 makes this always possible.
  int dk = enc.domain_size();
  std::vector<std::vector<int>> name_of(nbags);  // aligned with bag elems
  for (int b : order) {
    const auto& bag = td.bags[b];
    name_of[b].assign(bag.elems.size(), -1);
    uint32_t parent_used = 0, used = 0;
    if (bag.parent >= 0) {
      const auto& pb = td.bags[bag.parent];
      for (size_t i = 0; i < pb.elems.size(); i++)
        parent_used |= 1u << name_of[bag.parent][i];
      for (size_t i = 0; i < bag.elems.size(); i++) {
        auto it = std::lower_bound(pb.elems.begin(), pb.elems.end(),
                                   bag.elems[i]);
        if (it != pb.elems.end() && *it == bag.elems[i]) {
          name_of[b][i] = name_of[bag.parent][it - pb.elems.begin()];
          used |= 1u << name_of[b][i];
        }
      }
    }
    for (size_t i = 0; i < bag.elems.size(); i++) {
      if (name_of[b][i] >= 0) continue;
      int pick = -1;
      for (int a = 0; a < dk; a++)
        if (!((parent_used | used) >> a & 1)) {
          pick = a;
          break;
        }
      assert(pick >= 0);
      name_of[b][i] = pick;
      used |= 1u << pick;
    }
  }

  auto bag_mask = [&](int b) {
    uint32_t m = 0;
    for (int nm : name_of[b]) m |= 1u << nm;
    return m;
  };
  auto name_at = [&](int b, int elem) {
    const auto& bag = td.bags[b];
    auto it = std::lower_bound(bag.elems.begin(), bag.elems.end(), elem);
    return name_of[b][it - bag.elems.begin()];
  };

  // Binarization: a spine of bag copies, one fact per node, children
  // attached to the free slots, (0,0) leaves for fullness.
  struct Slot {
    int node;
    bool left;
  };
  std::vector<int> attach_node(nbags, -1);
  std::vector<bool> attach_left(nbags, false);

  auto link = [&](int parent, bool left, int child) {
    if (left)
      enc.nodes[parent].left = child;
    else
      enc.nodes[parent].right = child;
    enc.nodes[child].parent = parent;
  };

  for (int b : order) {
    const auto& bag = td.bags[b];
    int nfacts = static_cast<int>(facts_of[b].size());
    int nchildren = static_cast<int>(bag.children.size());
    int spine_len = std::max({1, nfacts, nchildren - 1});
    uint32_t d = bag_mask(b);

    std::vector<int> spine(spine_len);
    for (int j = 0; j < spine_len; j++) {
      std::optional<EncFact> ef;
      int fact_idx = -1;
      if (j < nfacts) {
        fact_idx = facts_of[b][j];
        const Fact& f = inst.facts()[fact_idx];
        EncFact e;
        e.rel = f.rel;
        for (int a : f.args)
          e.args.push_back(static_cast<uint8_t>(name_at(b, a)));
        ef = std::move(e);
      }
      spine[j] = enc.add_node(d, std::move(ef));
      enc.node_fact.resize(enc.nodes.size(), -1);
      enc.node_fact[spine[j]] = fact_idx;
      if (j > 0) link(spine[j - 1], /*left=*/true, spine[j]);
    }
    if (b == td.root)
      enc.root = spine[0];
    else
      link(attach_node[b], attach_left[b], spine[0]);

    std::vector<Slot> slots;
    for (int j = 0; j + 1 < spine_len; j++) slots.push_back({spine[j], false});
    slots.push_back({spine[spine_len - 1], true});
    slots.push_back({spine[spine_len - 1], false});

    for (int ci = 0; ci < nchildren; ci++) {
      attach_node[bag.children[ci]] = slots[ci].node;
      attach_left[bag.children[ci]] = slots[ci].left;
    }
    // Keep the tree full: any node left with exactly one child gets a
    // (0,0) padding leaf in its empty slot.
    for (int j = 0; j < spine_len; j++) {
      int filled = 0, empty_slot = -1;
      for (size_t si = 0; si < slots.size(); si++) {
        if (slots[si].node != spine[j]) continue;
        if (static_cast<int>(si) < nchildren)
          filled++;
        else if (empty_slot < 0)
          empty_slot = static_cast<int>(si);
      }
      if (j + 1 < spine_len) filled++;  // spine link
      if (filled == 1) {
        int leaf = enc.add_node(0, std::nullopt);
        link(slots[empty_slot].node, slots[empty_slot].left, leaf);
      }
    }
  }
  enc.node_fact.resize(enc.nodes.size(), -1);
  return enc;
}

Instance decode(const TreeEncoding& e, int name_offset) {
  Instance inst(e.sig);
  int n = static_cast<int>(e.nodes.size());
  int dk = e.domain_size();
  // Component id per (node, name): fresh element per a-connected subtree.
  std::vector<std::vector<int>> comp(n, std::vector<int>(dk, -1));
  int n_comps = 0;
  std::vector<int> order;
  order.reserve(n);
  if (e.root >= 0) {
    std::deque<int> queue{e.root};
    while (!queue.empty()) {
      int id = queue.front();
      queue.pop_front();
      order.push_back(id);
      if (e.nodes[id].left >= 0) queue.push_back(e.nodes[id].left);
      if (e.nodes[id].right >= 0) queue.push_back(e.nodes[id].right);
    }
  }
  for (int id : order) {
    const auto& node = e.nodes[id];
    int parent = node.parent;
    for (int a = 0; a < dk; a++) {
      if (!(node.d >> a & 1)) continue;
      if (parent >= 0 && (e.nodes[parent].d >> a & 1))
        comp[id][a] = comp[parent][a];
      else
        comp[id][a] = n_comps++;
    }
  }
  std::vector<int> elem_of_comp(n_comps, -1);
  auto elem_for = [&](int c) {
    if (elem_of_comp[c] < 0)
      elem_of_comp[c] =
          inst.intern("e" + std::to_string(c + name_offset));
    return elem_of_comp[c];
  };
  for (int id : order) {
    const auto& node = e.nodes[id];
    if (!node.fact) continue;
    std::vector<int> args;
    for (uint8_t a : node.fact->args) {
      if (!(node.d >> a & 1))
        throw ValidationError("malformed label: fact argument " +
                              TreeEncoding::dk_name(a) +
                              " not in node domain");
      args.push_back(elem_for(comp[id][a]));
    }
    inst.add_fact(node.fact->rel, std::move(args));
  }
  return inst;
}

TreeDecomposition read_td(const std::string& td_text,
                          const std::string& mapping_text, Instance& inst) {
  std::unordered_map<int, int> vertex_to_elem;
  {
    std::istringstream in(mapping_text);
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      int v;
      std::string name;
      if (ls >> v >> name) vertex_to_elem[v] = inst.intern(name);
    }
  }
  int nbags = -1;
  std::vector<std::vector<int>> bag_elems;
  std::vector<std::pair<int, int>> edges;
  std::istringstream in(td_text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok == "c") continue;
    if (tok == "s") {
      std::string td_tok;
      int w, nv;
      if (!(ls >> td_tok >> nbags >> w >> nv) || td_tok != "td")
        throw ParseError(lineno, 1, "bad solution line");
      bag_elems.assign(nbags, {});
    } else if (tok == "b") {
      int id, v;
      if (!(ls >> id) || id < 1 || id > nbags)
        throw ParseError(lineno, 1, "bad bag id");
      while (ls >> v) {
        auto it = vertex_to_elem.find(v);
        if (it == vertex_to_elem.end())
          throw ParseError(lineno, 1,
                           "vertex " + std::to_string(v) + " not in mapping");
        bag_elems[id - 1].push_back(it->second);
      }
    } else {
      int u = std::stoi(tok), v;
      if (!(ls >> v)) throw ParseError(lineno, 1, "bad edge line");
      edges.push_back({u - 1, v - 1});
    }
  }
  if (nbags < 0) throw ValidationError("missing 's td' line");
  // Orient the bag tree away from bag 1.
  std::vector<std::vector<int>> adj(nbags);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  TreeDecomposition td;
  std::vector<int> bag_id(nbags, -1);
  std::deque<std::pair<int, int>> queue{{0, -1}};  // (pace bag, parent id)
  while (!queue.empty()) {
    auto [b, parent] = queue.front();
    queue.pop_front();
    if (bag_id[b] >= 0) continue;
    bag_id[b] = td.add_bag(bag_elems[b], parent);
    for (int c : adj[b])
      if (bag_id[c] < 0) queue.push_back({c, bag_id[b]});
  }
  for (int b = 0; b < nbags; b++)
    if (bag_id[b] < 0) throw ValidationError("bag tree is disconnected");
  return td;
}

std::string write_td(const Instance& inst, const TreeDecomposition& td,
                     std::string* mapping_out) {
  auto dom = inst.active_domain();
  std::unordered_map<int, int> vertex_of;
  std::ostringstream mapping;
  for (size_t i = 0; i < dom.size(); i++) {
    vertex_of[dom[i]] = static_cast<int>(i) + 1;
    mapping << (i + 1) << " " << inst.element_name(dom[i]) << "\n";
  }
  if (mapping_out) *mapping_out = mapping.str();
  std::ostringstream out;
  out << "s td " << td.bags.size() << " " << td.width() + 1 << " "
      << dom.size() << "\n";
  for (size_t b = 0; b < td.bags.size(); b++) {
    out << "b " << (b + 1);
    for (int e : td.bags[b].elems) out << " " << vertex_of[e];
    out << "\n";
  }
  for (size_t b = 0; b < td.bags.size(); b++)
    if (td.bags[b].parent >= 0)
      out << (td.bags[b].parent + 1) << " " << (b + 1) << "\n";
  return out.str();
}

std::string encoding_to_json(const TreeEncoding& e) {
  nlohmann::json nodes = nlohmann::json::array();
  for (size_t i = 0; i < e.nodes.size(); i++) {
    const auto& n = e.nodes[i];
    nlohmann::json d = nlohmann::json::array();
    for (int a = 0; a < e.domain_size(); a++)
      if (n.d >> a & 1) d.push_back(TreeEncoding::dk_name(a));
    nlohmann::json fact;
    if (n.fact) {
      nlohmann::json args = nlohmann::json::array();
      for (uint8_t a : n.fact->args) args.push_back(TreeEncoding::dk_name(a));
      fact = {{"rel", e.sig.name(n.fact->rel)}, {"args", args}};
    }
    nodes.push_back({{"id", i},
                     {"d", d},
                     {"fact", fact},
                     {"left", n.left},
                     {"right", n.right}});
  }
  nlohmann::json j = {{"k", e.k}, {"root", e.root}, {"nodes", nodes}};
  return j.dump(2);
}

}  // namespace cfgd
