#pragma once

// Reading and writing the canonical corpus format.
//
// A corpus file is UTF-8 JSON Lines. The first line is a header record
//   {"record":"meta","schema_version":1,"contexts":[...],
//    "site_context_map":{site:context}, "day_labels":{"0":"2024-10-26"}}
// and every following line is one site visit
//   {"record":"visit","day_index":0,"origin_context":"adult",
//    "context_order":[...],"visit_order":0,"first_party":"example.com",
//    "context":"adult","cookies":[...],"scripts":[...]}
// Cookies carry setter_domain, name, value, expiry (null for session),
// mechanism ("http"|"js") and observed_at; scripts carry script_origin,
// script_url and api_calls {keyword: count}.

#include "collapse/domain.hpp"
#include "collapse/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace collapse {

inline constexpr int kCorpusSchemaVersion = 1;

/// Raw hostnames seen per registrable domain while loading. Only surfaced
/// in debug output.
struct LoadStats {
    std::map<std::string, std::map<std::string, std::size_t>> host_variants;
    std::size_t visit_lines = 0;
};

struct LoadOptions {
    const SuffixTable* suffix_table = nullptr;  // null = bundled snapshot
    LoadStats* stats = nullptr;
};

/// Parses "first_party<TAB>context" lines. Blank lines and '#' comments are
/// skipped; sites are normalized.
std::map<std::string, ContextLabel> read_context_map(std::istream& in, const SuffixTable& table);
std::map<std::string, ContextLabel> load_context_map(const std::filesystem::path& path,
                                                     const SuffixTable& table);

/// Parses a corpus stream. Errors carry the offending 1-based line number.
/// The site-context map from `context_map` (when given) overrides the header.
CrawlRecordSet read_corpus(std::istream& in,
                           const std::optional<std::map<std::string, ContextLabel>>& context_map,
                           const LoadOptions& options = {});

/// Loads a corpus file plus an optional context-map file. The result is
/// sorted by (day_index, origin_context, visit_order) and passes
/// validate_corpus.
CrawlRecordSet load_corpus(const std::filesystem::path& path,
                           const std::optional<std::filesystem::path>& context_map_path,
                           const LoadOptions& options = {});

void write_corpus(const CrawlRecordSet& corpus, std::ostream& out);
void write_context_map(const CrawlRecordSet& corpus, std::ostream& out);

/// Sorts runs and visits into canonical order.
void canonicalize(CrawlRecordSet& corpus);

}  // namespace collapse
