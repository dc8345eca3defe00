#include "collapse/report.hpp"

#include "collapse/error.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>

namespace collapse {

using nlohmann::json;

namespace {

constexpr std::string_view kVersion = "1.0.0";

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) out << ',';
        out << csv_field(cells[i]);
    }
    out << '\n';
}

std::string format_p(double p) {
    if (std::isnan(p)) return "nan";
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.6g", p);
    return buffer;
}

std::string number_word(std::size_t n) {
    static const char* words[] = {"Zero",    "One",     "Two",       "Three",    "Four",     "Five",    "Six",
                                  "Seven",   "Eight",   "Nine",      "Ten",      "Eleven",   "Twelve",  "Thirteen",
                                  "Fourteen", "Fifteen", "Sixteen",  "Seventeen", "Eighteen", "Nineteen", "Twenty"};
    if (n < std::size(words)) return words[n];
    return std::to_string(n);
}

json strings(const std::set<std::string>& items) { return json(std::vector<std::string>(items.begin(), items.end())); }

json contexts_json(const std::vector<ContextLabel>& contexts) {
    json out = json::array();
    for (const auto& c : contexts) out.push_back(c.str());
    return out;
}

json day_metrics_json(const DayMetrics& m) {
    return {{"day_index", m.day_index},
            {"unique_third_parties", m.unique_third_parties},
            {"cookie_count", m.cookie_count},
            {"persistent_identifiers", m.persistent_identifiers},
            {"pct_persistent", m.pct_persistent},
            {"participating_sites", m.participating_sites},
            {"crawled_sites", m.crawled_sites},
            {"participating_sites_pct", m.participating_sites_pct}};
}

json collapse_json(const std::vector<CollapseReport>& reports) {
    json out = json::array();
    for (const auto& r : reports) {
        json days = json::array();
        for (const auto& d : r.per_day) days.push_back(day_metrics_json(d));
        out.push_back({{"origin_context", r.origin_context.str()},
                       {"unique_third_parties", r.unique_third_parties},
                       {"cookie_count", r.cookie_count},
                       {"persistent_identifiers", r.persistent_identifiers},
                       {"pct_persistent", r.pct_persistent},
                       {"participating_sites_pct", r.participating_sites_pct},
                       {"per_day", days}});
    }
    return out;
}

json overlap_entry(const MechanismOverlap& overlap) {
    return {{"cookie_only", strings(overlap.cookie_only)},
            {"fp_only", strings(overlap.fp_only)},
            {"both", strings(overlap.both)},
            {"new_participating_sites", strings(overlap.new_participating_sites)}};
}

std::string dump(const json& node) { return node.dump(2) + "\n"; }

std::string iso_now() {
    auto now = std::chrono::system_clock::now();
    auto t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

}  // namespace

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.4f", value);
    std::string out = buffer;
    if (out == "-0.0000") out = "0.0000";
    return out;
}

const std::vector<std::string>& collapse_csv_header(Scope scope) {
    static const std::vector<std::string> tail = {"Average unique third-parties", "Average number of cookies",
                                                  "Average of Persistent Identifiers",
                                                  "Percentage of Persistent Identifiers",
                                                  "Participating Websites in Context Collapse"};
    static const std::vector<std::string> between = [] {
        std::vector<std::string> h{"First Context"};
        h.insert(h.end(), tail.begin(), tail.end());
        return h;
    }();
    static const std::vector<std::string> within = [] {
        std::vector<std::string> h{"Context"};
        h.insert(h.end(), tail.begin(), tail.end());
        return h;
    }();
    return scope == Scope::between ? between : within;
}

std::vector<std::string> diffusion_csv_header(std::size_t buckets) {
    std::vector<std::string> header{"First Context", "Average Number of Persistent Identifiers"};
    for (std::size_t d = 1; d < buckets; ++d) {
        header.push_back(number_word(d) + (d == 1 ? " Context Diffusion" : " Contexts Diffusion"));
    }
    if (buckets > 0) header.push_back("Diffusion across all contexts");
    return header;
}

const std::vector<std::string>& coverage_csv_header() {
    static const std::vector<std::string> header = {"First Context", "Tracker", "Percentage of Websites",
                                                    "Websites"};
    return header;
}

const std::vector<std::string>& anova_csv_header() {
    static const std::vector<std::string> header = {"metric", "source", "SS", "df", "MS", "F", "p"};
    return header;
}

void write_collapse_csv(std::ostream& out, const std::vector<CollapseReport>& reports, Scope scope) {
    write_row(out, collapse_csv_header(scope));
    for (const auto& r : reports) {
        write_row(out, {r.origin_context.str(), format_number(r.unique_third_parties), format_number(r.cookie_count),
                        format_number(r.persistent_identifiers), format_number(r.pct_persistent),
                        format_number(r.participating_sites_pct)});
    }
}

void write_diffusion_csv(std::ostream& out, const std::vector<DiffusionHistogram>& histograms,
                         std::size_t context_count) {
    const std::size_t buckets = context_count > 0 ? context_count - 1 : 0;
    write_row(out, diffusion_csv_header(buckets));
    for (const auto& h : histograms) {
        std::vector<std::string> row{h.origin_context.str(), format_number(h.mean_identifiers)};
        for (std::size_t i = 0; i < buckets; ++i) row.push_back(format_number(i < h.buckets.size() ? h.buckets[i] : 0.0));
        write_row(out, row);
    }
}

void write_coverage_csv(std::ostream& out, const CorpusAnalysis& analysis, Scope scope) {
    write_row(out, coverage_csv_header());
    std::vector<PersistentIdentifierFinding> all;
    for (const auto& origin : analysis.origins()) {
        std::vector<PersistentIdentifierFinding> findings;
        for (const auto* run : analysis.runs_from(origin)) {
            const auto& f = run->findings(scope);
            findings.insert(findings.end(), f.begin(), f.end());
        }
        for (const auto& c : coverage_distribution(findings))
            write_row(out, {origin.str(), c.tracker, format_number(c.percent), std::to_string(c.sites)});
        all.insert(all.end(), findings.begin(), findings.end());
    }
    for (const auto& c : coverage_distribution(all))
        write_row(out, {"all contexts", c.tracker, format_number(c.percent), std::to_string(c.sites)});
}

void write_anova_csv(std::ostream& out, const std::vector<AnovaRow>& rows) {
    write_row(out, anova_csv_header());
    for (const auto& row : rows) {
        const auto& r = row.result;
        write_row(out, {row.metric, "Between Groups", format_number(r.ss_between), std::to_string(r.df_between),
                        format_number(r.ms_between()), format_number(r.f_statistic), format_p(r.p_value)});
        write_row(out, {row.metric, "Within Groups", format_number(r.ss_within), std::to_string(r.df_within),
                        format_number(r.ms_within()), "", ""});
        write_row(out, {row.metric, "Total", format_number(r.ss_between + r.ss_within),
                        std::to_string(r.df_between + r.df_within), "", "", ""});
    }
}

json overlap_json(const CorpusAnalysis& analysis) {
    return {{"schema_version", kReportSchemaVersion},
            {"between", overlap_entry(mechanism_overlap(analysis, Scope::between))},
            {"within", overlap_entry(mechanism_overlap(analysis, Scope::within))}};
}

void write_container_table(std::ostream& out, const std::vector<ContainerPlan>& plans) {
    bool first = true;
    for (const auto& plan : plans) {
        if (!first) out << '\n';
        first = false;
        out << "First Context: " << plan.origin_context.str() << '\n';
        out << "Color\tFirst-party websites\n";
        for (const auto& [color, sites] : container_assignment(plan.coloring)) {
            out << color + 1 << "\t[";
            for (std::size_t i = 0; i < sites.size(); ++i) out << (i ? ", " : "") << sites[i];
            out << "]\n";
        }
    }
}

json containers_json(const std::vector<ContainerPlan>& plans, Scope scope) {
    json contexts = json::array();
    for (const auto& plan : plans) {
        json containers = json::array();
        for (const auto& [color, sites] : container_assignment(plan.coloring))
            containers.push_back({{"container", color}, {"sites", sites}});
        json days = json::array();
        for (const auto& [day, coloring] : plan.per_day)
            days.push_back({{"day_index", day}, {"num_colors", coloring.num_colors}, {"exact", coloring.exact}});
        contexts.push_back({{"origin_context", plan.origin_context.str()},
                            {"nodes", plan.graph.nodes.size()},
                            {"edges", plan.graph.edges.size()},
                            {"num_colors", plan.coloring.num_colors},
                            {"exact", plan.coloring.exact},
                            {"containers", containers},
                            {"per_day", days}});
    }
    return {{"schema_version", kReportSchemaVersion},
            {"scope", std::string(to_string(scope))},
            {"contexts", contexts}};
}

json findings_json(const CorpusAnalysis& analysis) {
    json rows = json::array();
    for (const auto& run : analysis.runs) {
        for (auto scope : {Scope::between, Scope::within}) {
            for (const auto& f : run.findings(scope)) {
                json evidence = json::array();
                for (const auto& e : f.evidence) {
                    evidence.push_back({{"first_party", e.first_party},
                                        {"context", e.context.str()},
                                        {"kind", e.kind == EvidenceKind::cookie ? "cookie" : "script"},
                                        {"token", e.token}});
                }
                json row = {{"day_index", run.run->day_index},
                            {"run_origin", run.run->origin_context.str()},
                            {"origin_context", f.origin_context.str()},
                            {"scope", std::string(to_string(scope))},
                            {"tracker", f.tracker},
                            {"mechanism", std::string(to_string(f.mechanism))},
                            {"sites", strings(f.sites())},
                            {"contexts_reached", contexts_json(f.contexts_reached)},
                            {"evidence", evidence}};
                if (scope == Scope::between) row["distance"] = diffusion_distance(f, *run.run);
                rows.push_back(std::move(row));
            }
        }
    }
    return {{"schema_version", kReportSchemaVersion}, {"findings", rows}};
}

json report_json(const PipelineResult& result) {
    json diffusion = json::array();
    for (const auto& h : result.diffusion) {
        diffusion.push_back({{"origin_context", h.origin_context.str()},
                             {"mean_identifiers", h.mean_identifiers},
                             {"days_with_findings", h.days_with_findings},
                             {"buckets", h.buckets}});
    }
    json keyword_stats = json::array();
    for (const auto& k : result.keyword_stats) {
        keyword_stats.push_back({{"keyword", k.keyword},
                                 {"site_count", k.site_count},
                                 {"fp_rate", k.fp_rate},
                                 {"non_fp_rate", k.non_fp_rate},
                                 {"likelihood_ratio", k.likelihood_ratio}});
    }
    json fingerprinters = json::object();
    for (const auto& [tracker, sites] : result.ids.fingerprinters) fingerprinters[tracker] = strings(sites);
    json anova = json::array();
    for (const auto& row : result.anova) {
        json means = json::object();
        for (const auto& [label, mean] : row.result.group_means) means[label.str()] = mean;
        anova.push_back({{"metric", row.metric},
                         {"f_statistic", row.result.f_statistic},
                         {"df_between", row.result.df_between},
                         {"df_within", row.result.df_within},
                         {"p_value", row.result.p_value},
                         {"group_means", means}});
    }
    return {{"schema_version", kReportSchemaVersion},
            {"between", collapse_json(result.between)},
            {"within", collapse_json(result.within)},
            {"diffusion", diffusion},
            {"id_cookies", result.ids.id_cookies},
            {"fingerprinters", fingerprinters},
            {"flagged_keywords", strings(result.ids.flagged)},
            {"keyword_stats", keyword_stats},
            {"anova", anova}};
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1)
        throw Error("internal", "sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return sha256_hex(buffer.str());
}

json RunManifest::to_json() const {
    auto paths = [](const std::vector<std::filesystem::path>& items) {
        json out = json::array();
        for (const auto& p : items) out.push_back(p.generic_string());
        return out;
    };
    return {{"schema_version", kReportSchemaVersion},
            {"subcommand", subcommand},
            {"inputs", paths(inputs)},
            {"configs", paths(configs)},
            {"output_dir", output_dir.generic_string()},
            {"tool_version", tool_version},
            {"corpus_digest", corpus_digest},
            {"outputs", outputs},
            {"created_at", created_at.empty() ? iso_now() : created_at}};
}

std::string tool_version() { return std::string(kVersion); }

std::string dot_file_name(Scope scope, const ContextLabel& context) {
    std::string stem;
    for (unsigned char c : context.str()) stem.push_back(std::isalnum(c) ? static_cast<char>(c) : '_');
    return "graph_" + std::string(to_string(scope)) + "_" + stem + ".dot";
}

std::vector<std::string> write_analysis(const PipelineResult& result, const CrawlRecordSet& corpus,
                                        const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        write_file_atomic(out_dir / name, content);
        written.push_back(name);
    };
    auto csv = [](auto&& fill) {
        std::ostringstream out;
        fill(out);
        return out.str();
    };

    emit("between.csv", csv([&](std::ostream& o) { write_collapse_csv(o, result.between, Scope::between); }));
    emit("within.csv", csv([&](std::ostream& o) { write_collapse_csv(o, result.within, Scope::within); }));
    emit("diffusion.csv",
         csv([&](std::ostream& o) { write_diffusion_csv(o, result.diffusion, corpus.contexts.size()); }));
    emit("coverage_between.csv",
         csv([&](std::ostream& o) { write_coverage_csv(o, result.analysis, Scope::between); }));
    emit("coverage_within.csv", csv([&](std::ostream& o) { write_coverage_csv(o, result.analysis, Scope::within); }));
    emit("anova.csv", csv([&](std::ostream& o) { write_anova_csv(o, result.anova); }));
    emit("overlap.json", dump(overlap_json(result.analysis)));
    emit("containers_between.json", dump(containers_json(result.containers_between, Scope::between)));
    emit("containers_within.json", dump(containers_json(result.containers_within, Scope::within)));
    emit("containers_between.txt",
         csv([&](std::ostream& o) { write_container_table(o, result.containers_between); }));
    emit("containers_within.txt", csv([&](std::ostream& o) { write_container_table(o, result.containers_within); }));
    emit("findings.json", dump(findings_json(result.analysis)));
    emit("report.json", dump(report_json(result)));
    for (auto scope : {Scope::between, Scope::within}) {
        for (const auto& plan : result.containers(scope)) {
            std::ostringstream out;
            write_dot(out, plan.graph, &plan.coloring,
                      std::string(to_string(scope)) + ":" + plan.origin_context.str());
            emit(dot_file_name(scope, plan.origin_context), out.str());
        }
    }
    std::sort(written.begin(), written.end());
    return written;
}

}  // namespace collapse
