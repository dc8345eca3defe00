#pragma once

// Keyword-based JavaScript fingerprinting detection.
//
// A keyword is flagged when scripts using it appear on at least `min_sites`
// first parties and it is at least `min_ratio` times more frequent in
// fingerprinting than in non-fingerprinting scripts. Both bounds are
// inclusive. Rates use add-one smoothing: (scripts with keyword + 1) /
// (scripts in class + 1), so a keyword never seen in non-fingerprinting
// scripts still has a finite ratio.

#include "collapse/domain.hpp"
#include "collapse/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace collapse {

enum class ScriptLabel { fp, non_fp };

struct LabeledScript {
    std::string first_party;
    ScriptObservation script;
    ScriptLabel label = ScriptLabel::non_fp;
};

struct KeywordStats {
    std::string keyword;
    std::size_t site_count = 0;
    double fp_rate = 0.0;
    double non_fp_rate = 0.0;
    double likelihood_ratio = 0.0;

    friend bool operator==(const KeywordStats&, const KeywordStats&) = default;
};

struct FingerprintThresholds {
    std::size_t min_sites = 3;
    double min_ratio = 16.0;
};

using KeywordSet = std::set<std::string>;

struct FingerprintVerdict {
    std::string script_origin;
    std::string script_url;
    KeywordSet matched_keywords;
    bool is_fingerprinting = false;
};

/// script origin -> first parties where a script from it used a flagged keyword.
using FingerprintMap = std::map<std::string, std::set<std::string>>;

/// Throws ConfigError when either label class is empty. Output is sorted by
/// keyword; site counts come from the whole corpus.
std::vector<KeywordStats> compute_keyword_stats(const std::vector<LabeledScript>& labeled,
                                                const CrawlRecordSet& corpus);

KeywordSet flag_keywords(const std::vector<KeywordStats>& stats, std::size_t min_sites = 3,
                         double min_ratio = 16.0);

FingerprintVerdict classify_script(const ScriptObservation& script, const KeywordSet& flagged);

FingerprintMap fingerprinting_trackers(const CrawlRecordSet& corpus, const KeywordSet& flagged);

/// One keyword per line; '#' starts a comment; surrounding blanks ignored.
KeywordSet read_keyword_list(std::istream& in);
KeywordSet load_keyword_list(const std::filesystem::path& path);
const KeywordSet& default_keywords();

/// Reads a labeled-script file: corpus format whose scripts carry an extra
/// "label" field ("fp" or "non_fp"). Unlabeled scripts are skipped and the
/// meta header is optional.
std::vector<LabeledScript> read_labeled_scripts(std::istream& in, const SuffixTable& table);
std::vector<LabeledScript> load_labeled_scripts(const std::filesystem::path& path,
                                                const SuffixTable& table);

}  // namespace collapse
