#pragma once

// Website graphs and the storage-container assignment derived from them.
//
// Two first parties are adjacent when some tracker persistently identified
// the browser on both. A proper vertex colouring of that graph therefore
// splits the sites into containers no tracker can bridge; the colour count
// is the number of containers needed.

#include "collapse/analytics.hpp"
#include "collapse/model.hpp"

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace collapse {

struct SiteGraph {
    std::map<std::string, ContextLabel> nodes;
    /// Directed edge (earlier visit -> later visit) -> attributing trackers.
    std::map<std::pair<std::string, std::string>, std::set<std::string>> edges;

    void add_node(const std::string& site, const ContextLabel& context) { nodes.try_emplace(site, context); }
    /// Adds u -> v (both must already be nodes); self-loops are ignored.
    void add_edge(const std::string& from, const std::string& to, const std::string& tracker);

    /// Undirected adjacency over the nodes in sorted order.
    std::vector<std::vector<std::size_t>> undirected_adjacency() const;
    std::vector<std::string> node_names() const;

    friend bool operator==(const SiteGraph&, const SiteGraph&) = default;
};

/// Clique over each finding's evidence sites, oriented by visit order in
/// `run`. Only findings of `scope` are used.
SiteGraph build_site_graph(const std::vector<PersistentIdentifierFinding>& findings, const CrawlRun& run,
                           Scope scope);

/// Union over several runs (each edge keeps every attributing tracker).
void merge_into(SiteGraph& target, const SiteGraph& other);

struct Coloring {
    std::map<std::string, int> color_of;
    int num_colors = 0;
    bool exact = false;

    friend bool operator==(const Coloring&, const Coloring&) = default;
};

struct ColoringOptions {
    std::size_t exact_node_limit = 25;
    std::chrono::milliseconds time_budget{10'000};
};

/// Colours numbered in order of first appearance over the sorted node names.
Coloring dsatur_coloring(const SiteGraph& graph);

/// Exact branch and bound when the graph has at most `exact_node_limit`
/// nodes and the search finishes within the budget (exact = true);
/// otherwise the best colouring found, starting from DSATUR (exact = false).
Coloring chromatic_number(const SiteGraph& graph, const ColoringOptions& options = {});

/// Index-level variants used by the graph routines and tests.
std::vector<int> dsatur_colors(const std::vector<std::vector<std::size_t>>& adjacency);
/// Returns the colouring and whether optimality was proven.
std::pair<std::vector<int>, bool> exact_colors(const std::vector<std::vector<std::size_t>>& adjacency,
                                               std::chrono::milliseconds budget);

bool is_valid_coloring(const SiteGraph& graph, const Coloring& coloring);

/// colour -> sites (ascending) for every colour in use.
std::map<int, std::vector<std::string>> container_assignment(const Coloring& coloring);

enum class DegreeKind { in, out };

struct DegreeRow {
    std::string site;
    ContextLabel context;
    std::size_t in_degree = 0;
    std::size_t out_degree = 0;

    friend bool operator==(const DegreeRow&, const DegreeRow&) = default;
};

/// All nodes, sorted by the requested degree (descending), then by name.
std::vector<DegreeRow> degree_report(const SiteGraph& graph, DegreeKind kind = DegreeKind::out);

/// Graphviz digraph with nodes and edges in sorted order; `coloring`
/// supplies each node's fillcolor index when given.
void write_dot(std::ostream& out, const SiteGraph& graph, const Coloring* coloring, const std::string& name);

}  // namespace collapse
