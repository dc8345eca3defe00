#include "collapse/graph.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace collapse;
using namespace fixtures;

namespace {

SiteGraph graph_of(const std::vector<std::string>& nodes, const std::vector<std::pair<int, int>>& edges) {
    SiteGraph g;
    for (const auto& n : nodes) g.add_node(n, ContextLabel("x"));
    for (auto [a, b] : edges) g.add_edge(nodes[a], nodes[b], "t.net");
    return g;
}

}  // namespace

TEST_CASE("one finding over three sites becomes a visit-ordered clique") {
    auto r = run(0, {"x"},
                 {visit("a.com", "x", 0, {cookie("t.net", "uid", "v")}),
                  visit("b.com", "x", 1, {cookie("t.net", "uid", "v")}),
                  visit("c.com", "x", 2, {cookie("t.net", "uid", "v")})});
    Identifiers ids;
    ids.id_cookies["t.net"] = "uid";
    auto findings = within_context_findings(r, ContextLabel("x"), ids);
    auto g = build_site_graph(findings, r, Scope::within);
    CHECK(g.nodes.size() == 3);
    CHECK(g.edges.size() == 3);
    CHECK(g.edges.contains({"a.com", "b.com"}));
    CHECK(g.edges.contains({"a.com", "c.com"}));
    CHECK(g.edges.contains({"b.com", "c.com"}));
    CHECK(g.edges.at({"a.com", "b.com"}) == std::set<std::string>{"t.net"});
    CHECK(build_site_graph(findings, r, Scope::between).nodes.empty());
}

TEST_CASE("triangle needs three colours") {
    auto g = graph_of({"a", "b", "c"}, {{0, 1}, {1, 2}, {0, 2}});
    auto c = chromatic_number(g);
    CHECK(c.num_colors == 3);
    CHECK(c.exact);
    CHECK(is_valid_coloring(g, c));
}

TEST_CASE("edgeless and singleton graphs") {
    auto edgeless = graph_of({"a", "b", "c", "d"}, {});
    auto c = chromatic_number(edgeless);
    CHECK(c.num_colors == 1);
    CHECK(container_assignment(c) == std::map<int, std::vector<std::string>>{{0, {"a", "b", "c", "d"}}});
    auto single = chromatic_number(graph_of({"a"}, {}));
    CHECK(single.num_colors == 1);
    CHECK(single.color_of.at("a") == 0);
    auto empty = chromatic_number(SiteGraph{});
    CHECK(empty.num_colors == 0);
    CHECK(empty.exact);
}

TEST_CASE("path A-B-C gives two containers") {
    auto g = graph_of({"A", "B", "C"}, {{0, 1}, {1, 2}});
    auto c = chromatic_number(g);
    CHECK(c.num_colors == 2);
    CHECK(container_assignment(c) == std::map<int, std::vector<std::string>>{{0, {"A", "C"}}, {1, {"B"}}});
}

TEST_CASE("odd cycle and bipartite graphs") {
    auto c5 = graph_of({"a", "b", "c", "d", "e"}, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}});
    CHECK(chromatic_number(c5).num_colors == 3);
    auto k33 = graph_of({"a", "b", "c", "d", "e", "f"},
                        {{0, 3}, {0, 4}, {0, 5}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}});
    CHECK(chromatic_number(k33).num_colors == 2);
}

TEST_CASE("exact search can be switched off") {
    auto g = graph_of({"a", "b", "c"}, {{0, 1}, {1, 2}, {0, 2}});
    ColoringOptions options;
    options.exact_node_limit = 0;
    auto c = chromatic_number(g, options);
    CHECK_FALSE(c.exact);
    CHECK(c.num_colors == 3);
    CHECK(c == dsatur_coloring(g));
}

TEST_CASE("colour count is invariant under relabelling") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 8);
        std::vector<std::pair<int, int>> edges;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (rng() % 3 == 0) edges.push_back({a, b});
        std::vector<std::string> names, shuffled;
        for (int i = 0; i < n; ++i) names.push_back("n" + std::to_string(10 + i));
        shuffled = names;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        auto c1 = chromatic_number(graph_of(names, edges));
        auto g2 = graph_of(shuffled, edges);
        auto c2 = chromatic_number(g2);
        CHECK(c1.num_colors == c2.num_colors);
        CHECK(is_valid_coloring(g2, c2));
        CHECK(dsatur_coloring(g2).num_colors >= c2.num_colors);
    }
}

TEST_CASE("invalid colourings are detected") {
    auto g = graph_of({"a", "b"}, {{0, 1}});
    Coloring bad{{{"a", 0}, {"b", 0}}, 1, false};
    CHECK_FALSE(is_valid_coloring(g, bad));
    Coloring missing{{{"a", 0}}, 1, false};
    CHECK_FALSE(is_valid_coloring(g, missing));
}

TEST_CASE("degree report") {
    auto star = graph_of({"hub", "a", "b", "c"}, {{0, 1}, {0, 2}, {0, 3}});
    auto out = degree_report(star);
    REQUIRE(out.size() == 4);
    CHECK(out[0] == DegreeRow{"hub", ContextLabel("x"), 0, 3});
    CHECK(out[1].site == "a");
    auto in = degree_report(star, DegreeKind::in);
    CHECK(in[0].site == "a");
    CHECK(in[0].in_degree == 1);
    CHECK(in.back().site == "hub");
    CHECK(degree_report(SiteGraph{}).empty());
}

TEST_CASE("merging keeps every attributing tracker") {
    SiteGraph a, b;
    a.add_node("x.com", ContextLabel("c"));
    a.add_node("y.com", ContextLabel("c"));
    a.add_edge("x.com", "y.com", "t1.net");
    b.add_node("x.com", ContextLabel("c"));
    b.add_node("y.com", ContextLabel("c"));
    b.add_node("z.com", ContextLabel("c"));
    b.add_edge("x.com", "y.com", "t2.net");
    b.add_edge("y.com", "z.com", "t2.net");
    b.add_edge("z.com", "z.com", "t2.net");
    merge_into(a, b);
    CHECK(a.nodes.size() == 3);
    CHECK(a.edges.size() == 2);
    CHECK(a.edges.at({"x.com", "y.com"}) == std::set<std::string>{"t1.net", "t2.net"});
}

TEST_CASE("DOT output") {
    auto g = graph_of({"a.com", "b.com"}, {{0, 1}});
    auto c = chromatic_number(g);
    std::ostringstream out;
    write_dot(out, g, &c, "between health");
    CHECK(out.str() ==
          "digraph \"between health\" {\n"
          "  node [style=filled, colorscheme=set312];\n"
          "  \"a.com\" [context=\"x\", container=0, fillcolor=1];\n"
          "  \"b.com\" [context=\"x\", container=1, fillcolor=2];\n"
          "  \"a.com\" -> \"b.com\" [trackers=\"t.net\"];\n"
          "}\n");
    std::ostringstream plain;
    write_dot(plain, g, nullptr, "g");
    CHECK(plain.str().find("container=") == std::string::npos);
}
