#include "collapse/graph.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

namespace collapse {

namespace {

using Adjacency = std::vector<std::vector<std::size_t>>;
using Clock = std::chrono::steady_clock;

std::size_t greedy_clique_size(const Adjacency& adjacency) {
    const std::size_t n = adjacency.size();
    std::vector<std::vector<bool>> adjacent(n, std::vector<bool>(n, false));
    for (std::size_t v = 0; v < n; ++v) {
        for (auto w : adjacency[v]) adjacent[v][w] = true;
    }
    std::vector<std::size_t> by_degree(n);
    std::iota(by_degree.begin(), by_degree.end(), 0);
    std::stable_sort(by_degree.begin(), by_degree.end(),
                     [&](std::size_t a, std::size_t b) { return adjacency[a].size() > adjacency[b].size(); });
    std::size_t best = n > 0 ? 1 : 0;
    for (auto seed : by_degree) {
        std::vector<std::size_t> clique{seed};
        for (auto v : by_degree) {
            if (v == seed) continue;
            if (std::all_of(clique.begin(), clique.end(), [&](std::size_t u) { return adjacent[u][v]; }))
                clique.push_back(v);
        }
        best = std::max(best, clique.size());
    }
    return best;
}

/// Branch and bound over DSATUR vertex order.
class ExactSearch {
public:
    ExactSearch(const Adjacency& adjacency, Clock::time_point deadline)
        : adjacency_(adjacency),
          n_(adjacency.size()),
          colors_(n_, -1),
          neighbour_colors_(n_, std::vector<int>(n_ + 1, 0)),
          saturation_(n_, 0),
          deadline_(deadline) {}

    /// Returns false when the deadline cut the search short.
    bool run(std::vector<int>& best, int& best_count, int lower_bound) {
        best_ = &best;
        best_count_ = &best_count;
        lower_bound_ = lower_bound;
        if (best_count <= lower_bound) return true;
        search(0, 0);
        return !timed_out_;
    }

private:
    void assign(std::size_t v, int color) {
        colors_[v] = color;
        for (auto w : adjacency_[v]) {
            if (neighbour_colors_[w][color]++ == 0) ++saturation_[w];
        }
    }

    void unassign(std::size_t v) {
        int color = colors_[v];
        for (auto w : adjacency_[v]) {
            if (--neighbour_colors_[w][color] == 0) --saturation_[w];
        }
        colors_[v] = -1;
    }

    std::size_t pick() const {
        std::size_t chosen = n_;
        for (std::size_t v = 0; v < n_; ++v) {
            if (colors_[v] >= 0) continue;
            if (chosen == n_ || saturation_[v] > saturation_[chosen] ||
                (saturation_[v] == saturation_[chosen] && adjacency_[v].size() > adjacency_[chosen].size()))
                chosen = v;
        }
        return chosen;
    }

    bool done() const { return timed_out_ || *best_count_ <= lower_bound_; }

    void search(std::size_t colored, int used) {
        if ((++visited_ & 0x3ff) == 0 && Clock::now() > deadline_) timed_out_ = true;
        if (done()) return;
        if (colored == n_) {
            if (used < *best_count_) {
                *best_count_ = used;
                *best_ = colors_;
            }
            return;
        }
        if (used >= *best_count_) return;
        auto v = pick();
        for (int c = 0; c < used && !done(); ++c) {
            if (neighbour_colors_[v][c] != 0) continue;
            assign(v, c);
            search(colored + 1, used);
            unassign(v);
        }
        if (!done() && used + 1 < *best_count_) {
            assign(v, used);
            search(colored + 1, used + 1);
            unassign(v);
        }
    }

    const Adjacency& adjacency_;
    std::size_t n_;
    std::vector<int> colors_;
    std::vector<std::vector<int>> neighbour_colors_;
    std::vector<int> saturation_;
    Clock::time_point deadline_;
    std::vector<int>* best_ = nullptr;
    int* best_count_ = nullptr;
    int lower_bound_ = 0;
    std::uint64_t visited_ = 0;
    bool timed_out_ = false;
};

int count_colors(const std::vector<int>& colors) {
    int top = -1;
    for (int c : colors) top = std::max(top, c);
    return top + 1;
}

Coloring to_coloring(const SiteGraph& graph, const std::vector<int>& colors, bool exact) {
    Coloring out;
    out.exact = exact;
    auto names = graph.node_names();
    std::map<int, int> renumber;
    for (std::size_t i = 0; i < names.size(); ++i) {
        auto [it, inserted] = renumber.try_emplace(colors[i], static_cast<int>(renumber.size()));
        out.color_of[names[i]] = it->second;
    }
    out.num_colors = static_cast<int>(renumber.size());
    return out;
}

std::string dot_quote(const std::string& text) {
    std::string out = "\"";
    for (char c : text) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

void SiteGraph::add_edge(const std::string& from, const std::string& to, const std::string& tracker) {
    if (from == to) return;
    edges[{from, to}].insert(tracker);
}

std::vector<std::string> SiteGraph::node_names() const {
    std::vector<std::string> names;
    names.reserve(nodes.size());
    for (const auto& [site, context] : nodes) names.push_back(site);
    return names;
}

std::vector<std::vector<std::size_t>> SiteGraph::undirected_adjacency() const {
    std::map<std::string, std::size_t> index;
    for (const auto& [site, context] : nodes) index.emplace(site, index.size());
    std::vector<std::set<std::size_t>> sets(nodes.size());
    for (const auto& [edge, trackers] : edges) {
        auto a = index.at(edge.first);
        auto b = index.at(edge.second);
        sets[a].insert(b);
        sets[b].insert(a);
    }
    std::vector<std::vector<std::size_t>> out;
    out.reserve(sets.size());
    for (const auto& s : sets) out.emplace_back(s.begin(), s.end());
    return out;
}

SiteGraph build_site_graph(const std::vector<PersistentIdentifierFinding>& findings, const CrawlRun& run,
                           Scope scope) {
    std::map<std::string, std::int64_t> order;
    for (const auto& visit : run.visits) order.try_emplace(visit.first_party, visit.visit_order);

    SiteGraph graph;
    for (const auto& finding : findings) {
        if (finding.scope != scope) continue;
        std::vector<std::pair<std::int64_t, std::string>> sites;
        std::set<std::string> seen;
        for (const auto& row : finding.evidence) {
            if (!seen.insert(row.first_party).second) continue;
            graph.add_node(row.first_party, row.context);
            auto it = order.find(row.first_party);
            sites.emplace_back(it == order.end() ? 0 : it->second, row.first_party);
        }
        std::sort(sites.begin(), sites.end());
        for (std::size_t i = 0; i < sites.size(); ++i) {
            for (std::size_t j = i + 1; j < sites.size(); ++j) {
                graph.add_edge(sites[i].second, sites[j].second, finding.tracker);
            }
        }
    }
    return graph;
}

void merge_into(SiteGraph& target, const SiteGraph& other) {
    for (const auto& [site, context] : other.nodes) target.add_node(site, context);
    for (const auto& [edge, trackers] : other.edges) target.edges[edge].insert(trackers.begin(), trackers.end());
}

std::vector<int> dsatur_colors(const Adjacency& adjacency) {
    const std::size_t n = adjacency.size();
    std::vector<int> colors(n, -1);
    std::vector<std::set<int>> neighbour_colors(n);
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t chosen = n;
        for (std::size_t v = 0; v < n; ++v) {
            if (colors[v] >= 0) continue;
            if (chosen == n || neighbour_colors[v].size() > neighbour_colors[chosen].size() ||
                (neighbour_colors[v].size() == neighbour_colors[chosen].size() &&
                 adjacency[v].size() > adjacency[chosen].size()))
                chosen = v;
        }
        int color = 0;
        while (neighbour_colors[chosen].contains(color)) ++color;
        colors[chosen] = color;
        for (auto w : adjacency[chosen]) neighbour_colors[w].insert(color);
    }
    return colors;
}

std::pair<std::vector<int>, bool> exact_colors(const Adjacency& adjacency, std::chrono::milliseconds budget) {
    auto best = dsatur_colors(adjacency);
    int best_count = count_colors(best);
    int lower = static_cast<int>(greedy_clique_size(adjacency));
    ExactSearch search(adjacency, Clock::now() + budget);
    bool proven = search.run(best, best_count, lower);
    return {best, proven};
}

Coloring dsatur_coloring(const SiteGraph& graph) {
    return to_coloring(graph, dsatur_colors(graph.undirected_adjacency()), false);
}

Coloring chromatic_number(const SiteGraph& graph, const ColoringOptions& options) {
    auto adjacency = graph.undirected_adjacency();
    if (adjacency.size() > options.exact_node_limit) return to_coloring(graph, dsatur_colors(adjacency), false);
    auto [colors, proven] = exact_colors(adjacency, options.time_budget);
    return to_coloring(graph, colors, proven);
}

bool is_valid_coloring(const SiteGraph& graph, const Coloring& coloring) {
    if (coloring.color_of.size() != graph.nodes.size()) return false;
    std::set<int> used;
    for (const auto& [site, context] : graph.nodes) {
        auto it = coloring.color_of.find(site);
        if (it == coloring.color_of.end() || it->second < 0) return false;
        used.insert(it->second);
    }
    if (static_cast<int>(used.size()) != coloring.num_colors) return false;
    for (const auto& [edge, trackers] : graph.edges) {
        if (coloring.color_of.at(edge.first) == coloring.color_of.at(edge.second)) return false;
    }
    return true;
}

std::map<int, std::vector<std::string>> container_assignment(const Coloring& coloring) {
    std::map<int, std::vector<std::string>> out;
    for (const auto& [site, color] : coloring.color_of) out[color].push_back(site);  // map order: sorted
    return out;
}

std::vector<DegreeRow> degree_report(const SiteGraph& graph, DegreeKind kind) {
    std::map<std::string, DegreeRow> rows;
    for (const auto& [site, context] : graph.nodes) rows[site] = {site, context, 0, 0};
    for (const auto& [edge, trackers] : graph.edges) {
        ++rows[edge.first].out_degree;
        ++rows[edge.second].in_degree;
    }
    std::vector<DegreeRow> out;
    for (auto& [site, row] : rows) out.push_back(std::move(row));
    std::stable_sort(out.begin(), out.end(), [kind](const DegreeRow& a, const DegreeRow& b) {
        auto da = kind == DegreeKind::out ? a.out_degree : a.in_degree;
        auto db = kind == DegreeKind::out ? b.out_degree : b.in_degree;
        return da > db;
    });
    return out;
}

void write_dot(std::ostream& out, const SiteGraph& graph, const Coloring* coloring, const std::string& name) {
    out << "digraph " << dot_quote(name) << " {\n";
    out << "  node [style=filled, colorscheme=set312];\n";
    for (const auto& [site, context] : graph.nodes) {
        out << "  " << dot_quote(site) << " [context=" << dot_quote(context.str());
        if (coloring) {
            int color = coloring->color_of.at(site);
            out << ", container=" << color << ", fillcolor=" << (color % 12) + 1;
        }
        out << "];\n";
    }
    for (const auto& [edge, trackers] : graph.edges) {
        std::string label;
        for (const auto& tracker : trackers) {
            if (!label.empty()) label += ' ';
            label += tracker;
        }
        out << "  " << dot_quote(edge.first) << " -> " << dot_quote(edge.second) << " [trackers=" << dot_quote(label)
            << "];\n";
    }
    out << "}\n";
}

}  // namespace collapse
