#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "helpers.hpp"

using namespace cfgd;
using namespace cfgd::testing;

TEST_CASE("table 1 decomposition validates at width 2") {
  Instance i = table1_instance();
  TreeDecomposition td = table1_decomposition(i);
  CHECK(validate_decomposition(i, td) == 2);
}

TEST_CASE("empty instance, single empty bag, width 0") {
  Instance i;
  TreeDecomposition td;
  td.add_bag({}, -1);
  CHECK(validate_decomposition(i, td) == 0);
}

TEST_CASE("uncovered fact is reported") {
  Instance i = parse_instance("R(1,2).\n");
  TreeDecomposition td;
  int b = td.add_bag({i.element_id("1")}, -1);
  td.add_bag({i.element_id("2")}, b);
  CHECK_THROWS_WITH_AS(validate_decomposition(i, td),
                       doctest::Contains("uncovered fact R(1,2)"),
                       ValidationError);
}

TEST_CASE("disconnected element is reported with two bags") {
  Instance i = parse_instance("R(1,2). R(1,3).\n");
  TreeDecomposition td;
  int b0 = td.add_bag({i.element_id("1"), i.element_id("2")}, -1);
  int b1 = td.add_bag({i.element_id("2"), i.element_id("3")}, b0);
  td.add_bag({i.element_id("1"), i.element_id("3")}, b1);
  CHECK_THROWS_WITH_AS(validate_decomposition(i, td),
                       doctest::Contains("disconnected element 1"),
                       ValidationError);
}

TEST_CASE("minfill on table 1 reaches the exact treewidth 2") {
  Instance i = table1_instance();
  TreeDecomposition td = decompose_minfill(i);
  CHECK(validate_decomposition(i, td) == 2);
  CHECK(exact_treewidth(PrimalGraph::of_instance(i)) == 2);
}

TEST_CASE("minfill on a single fact gives one bag of width 1") {
  Instance i = parse_instance("R(1,2).\n");
  TreeDecomposition td = decompose_minfill(i);
  CHECK(validate_decomposition(i, td) == 1);
}

TEST_CASE("minfill on a 100-chain gives width 1") {
  Instance i = chain_instance(100);
  TreeDecomposition td = decompose_minfill(i);
  CHECK(validate_decomposition(i, td) == 1);
}

TEST_CASE("minfill output is deterministic and always valid") {
  for (uint64_t seed = 0; seed < 30; seed++) {
    auto gen = random_tw_instance(seed, 2, 8);
    TreeDecomposition td = decompose_minfill(gen.instance);
    CHECK_NOTHROW(validate_decomposition(gen.instance, td));
    TreeDecomposition td2 = decompose_minfill(gen.instance);
    CHECK(td.bags.size() == td2.bags.size());
    for (size_t b = 0; b < td.bags.size(); b++) {
      CHECK(td.bags[b].elems == td2.bags[b].elems);
      CHECK(td.bags[b].parent == td2.bags[b].parent);
    }
  }
}

TEST_CASE("simplicial check: join tree of an acyclic CQ") {
  ConjunctiveQuery q = parse_cq("R(x,y), S(y,z)");
  TreeDecomposition jt = gyo_join_tree(q);
  CHECK(check_simplicial(cq_primal(q), jt));
}

TEST_CASE("simplicial check: single bag is always simplicial") {
  ConjunctiveQuery q = parse_cq("R(x,y), R(y,z), R(z,x)");
  TreeDecomposition td;
  td.add_bag({0, 1, 2}, -1);
  CHECK(check_simplicial(cq_primal(q), td));
}

TEST_CASE("simplicial check: 4-cycle path decomposition is not simplicial") {
  ConjunctiveQuery q = parse_cq("R(x1,x2), R(x2,x3), R(x3,x4), R(x4,x1)");
  // Width-2 path decomposition with interface {x1,x3}, which is not an edge.
  TreeDecomposition td;
  int b = td.add_bag({0, 1, 2}, -1);  // x1 x2 x3
  td.add_bag({0, 2, 3}, b);           // x1 x3 x4
  CHECK(validate_decomposition(cq_primal(q), td) == 2);
  CHECK(!check_simplicial(cq_primal(q), td));
}

TEST_CASE("encode table 1 at k=2 and decode back") {
  Instance i = table1_instance();
  TreeDecomposition td = table1_decomposition(i);
  TreeEncoding e = encode(i, td, 2);
  CHECK(e.domain_size() == 6);
  validate_encoding(e);
  Instance back = decode(e);
  CHECK(are_isomorphic(back, i));
}

TEST_CASE("encode rejects too-small k") {
  Instance i = table1_instance();
  TreeDecomposition td = table1_decomposition(i);
  CHECK_THROWS_WITH_AS(encode(i, td, 1), doctest::Contains("width-exceeds-k"),
                       ValidationError);
}

TEST_CASE("empty instance encodes to a single empty node") {
  Instance i;
  TreeDecomposition td;
  TreeEncoding e = encode(i, td, 1);
  CHECK(e.nodes.size() == 1);
  CHECK(e.nodes[e.root].d == 0);
  CHECK(!e.nodes[e.root].fact);
  CHECK(decode(e).size() == 0);
}

TEST_CASE("same name in disconnected subtrees decodes to two elements") {
  // Two unary facts U(a1) at unrelated nodes whose domains do not connect.
  TreeEncoding e;
  e.k = 1;
  e.sig.declare("U", 1);
  EncFact f;
  f.rel = 0;
  f.args = {0};
  int root = e.add_node(0, std::nullopt);
  int l = e.add_node(1, f);
  int r = e.add_node(1, f);
  e.nodes[root].left = l;
  e.nodes[root].right = r;
  e.nodes[l].parent = root;
  e.nodes[r].parent = root;
  e.root = root;
  validate_encoding(e);
  Instance back = decode(e);
  CHECK(back.size() == 2);  // two distinct decoded elements
  CHECK(back.active_domain().size() == 2);
  TreeEncoding e2;
  e2.k = 1;
  e2.sig.declare("R", 2);
  EncFact g;
  g.rel = 0;
  g.args = {0, 1};
  int root2 = e2.add_node(0, std::nullopt);
  int l2 = e2.add_node(3, g);
  int r2 = e2.add_node(3, g);
  e2.nodes[root2].left = l2;
  e2.nodes[root2].right = r2;
  e2.nodes[l2].parent = root2;
  e2.nodes[r2].parent = root2;
  e2.root = root2;
  Instance back2 = decode(e2);
  CHECK(back2.size() == 2);
  CHECK(back2.active_domain().size() == 4);
}

TEST_CASE("decode rejects malformed labels") {
  TreeEncoding e;
  e.k = 1;
  e.sig.declare("R", 2);
  EncFact f;
  f.rel = 0;
  f.args = {0, 2};  // a3 not in d = {a1}
  e.root = e.add_node(1, f);
  CHECK_THROWS_WITH_AS(decode(e), doctest::Contains("malformed label"),
                       ValidationError);
  CHECK_THROWS_AS(validate_encoding(e), ValidationError);
}

TEST_CASE("fullness is enforced by the validator") {
  TreeEncoding e;
  e.k = 1;
  int root = e.add_node(0, std::nullopt);
  int child = e.add_node(0, std::nullopt);
  e.nodes[root].left = child;
  e.nodes[child].parent = root;
  e.root = root;
  CHECK_THROWS_WITH_AS(validate_encoding(e), doctest::Contains("full"),
                       ValidationError);
}

TEST_CASE("round-trip on random instances, via minfill and given td") {
  for (uint64_t seed = 0; seed < 40; seed++) {
    auto gen = random_tw_instance(seed, 1 + static_cast<int>(seed % 3), 7);
    int w = validate_decomposition(gen.instance, gen.td);
    TreeEncoding e = encode(gen.instance, gen.td, w);
    validate_encoding(e);
    CHECK(are_isomorphic(decode(e), gen.instance));

    TreeDecomposition mf = decompose_minfill(gen.instance);
    int w2 = validate_decomposition(gen.instance, mf);
    TreeEncoding e2 = encode(gen.instance, mf, w2 + 1);  // slack in k
    validate_encoding(e2);
    CHECK(are_isomorphic(decode(e2), gen.instance));
  }
}

TEST_CASE("two independently generated decodings are isomorphic") {
  Instance i = table1_instance();
  TreeEncoding e = encode(i, table1_decomposition(i), 2);
  Instance a = decode(e, 0);
  Instance b = decode(e, 1000);
  CHECK(are_isomorphic(a, b));
}

TEST_CASE("acceptance under two different decompositions of one instance") {
  Instance i = table1_instance();
  TreeEncoding e1 = encode(i, table1_decomposition(i), 2);
  TreeEncoding e2 = encode(i, decompose_minfill(i), 2);
  CHECK(are_isomorphic(decode(e1), decode(e2)));
}

TEST_CASE("PACE .td round trip") {
  Instance i = table1_instance();
  TreeDecomposition td = table1_decomposition(i);
  std::string mapping;
  std::string text = write_td(i, td, &mapping);
  TreeDecomposition back = read_td(text, mapping, i);
  CHECK(validate_decomposition(i, back) == 2);
  CHECK(back.bags.size() == td.bags.size());
}

TEST_CASE("encoding JSON export lists nodes with D_k names") {
  Instance i = parse_instance("R(1,2).\n");
  TreeEncoding e = encode(i, decompose_minfill(i), 1);
  std::string json = encoding_to_json(e);
  CHECK(json.find("\"a1\"") != std::string::npos);
  CHECK(json.find("\"fact\"") != std::string::npos);
}
