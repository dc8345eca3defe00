#pragma once

// Output tables and files of an analysis run.
//
// CSV: RFC 4180 quoting, '\n' line ends, numbers with four decimals.
// JSON: two-space indent, keys sorted, "schema_version": 1 at the top.

#include "collapse/analytics.hpp"
#include "collapse/pipeline.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace collapse {

inline constexpr int kReportSchemaVersion = 1;

std::string csv_field(std::string_view text);
std::string format_number(double value);

/// Frozen column headers.
const std::vector<std::string>& collapse_csv_header(Scope scope);
/// "First Context", "Average Number of Persistent Identifiers", then one
/// column per distance 1..buckets-1 ("One Context Diffusion", "Two Contexts
/// Diffusion", ...) and "Diffusion across all contexts".
std::vector<std::string> diffusion_csv_header(std::size_t buckets);
const std::vector<std::string>& coverage_csv_header();
const std::vector<std::string>& anova_csv_header();

void write_collapse_csv(std::ostream& out, const std::vector<CollapseReport>& reports, Scope scope);
void write_diffusion_csv(std::ostream& out, const std::vector<DiffusionHistogram>& histograms,
                         std::size_t context_count);
/// Per origin context plus an "all contexts" block.
void write_coverage_csv(std::ostream& out, const CorpusAnalysis& analysis, Scope scope);
void write_anova_csv(std::ostream& out, const std::vector<AnovaRow>& rows);

/// Two-column text table per plan: "Color" (container + 1) and the
/// bracketed first-party list, preceded by a "First Context: <ctx>" line.
void write_container_table(std::ostream& out, const std::vector<ContainerPlan>& plans);

nlohmann::json overlap_json(const CorpusAnalysis& analysis);
nlohmann::json containers_json(const std::vector<ContainerPlan>& plans, Scope scope);
nlohmann::json findings_json(const CorpusAnalysis& analysis);
nlohmann::json report_json(const PipelineResult& result);

/// Writes to "<path>.tmp" and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Provenance of one command invocation.
struct RunManifest {
    std::string subcommand;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> configs;
    std::filesystem::path output_dir;
    std::string tool_version;
    std::string corpus_digest;  // sha256 over the input files in order
    std::vector<std::string> outputs;
    std::string created_at;     // UTC, ISO 8601

    nlohmann::json to_json() const;
};

std::string tool_version();

/// File name used for a context in DOT output ("graph_between_news_media.dot").
std::string dot_file_name(Scope scope, const ContextLabel& context);

/// Writes every analysis artifact into `out_dir` (created if missing) and
/// returns the file names written, sorted. Does not write the manifest.
std::vector<std::string> write_analysis(const PipelineResult& result, const CrawlRecordSet& corpus,
                                        const std::filesystem::path& out_dir);

}  // namespace collapse
