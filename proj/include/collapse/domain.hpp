#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace collapse {

/// Public-suffix rule set in the publicsuffix.org list format.
///
/// Lookup is total: a hostname matching no rule falls back to the implicit
/// "*" rule, so its registrable domain is its last two labels.
class SuffixTable {
public:
    static SuffixTable parse(std::string_view list_text);
    static SuffixTable load(const std::filesystem::path& path);

    /// The snapshot compiled into the library.
    static const SuffixTable& bundled();

    /// Number of labels in the public suffix of `labels` (>= 1).
    std::size_t suffix_label_count(const std::vector<std::string_view>& labels) const;

    const std::string& version() const noexcept { return version_; }
    std::size_t rule_count() const noexcept {
        return rules_.size() + wildcards_.size() + exceptions_.size();
    }

private:
    std::unordered_set<std::string> rules_;
    std::unordered_set<std::string> wildcards_;   // "*.ck" stored as "ck"
    std::unordered_set<std::string> exceptions_;  // "!www.ck" stored as "www.ck"
    std::string version_;
};

/// Reduces a hostname to its registrable domain (eTLD+1).
///
/// Case-insensitive; a single leading dot (cookie Domain attribute) and a
/// single trailing dot (FQDN) are dropped. IPv4 literals and hostnames that
/// are themselves public suffixes are returned unchanged. Throws ParseError
/// on an empty label, an over-long label, or a character outside
/// [a-z0-9_-].
std::string normalize_domain(std::string_view hostname, const SuffixTable& table);

inline std::string normalize_domain(std::string_view hostname) {
    return normalize_domain(hostname, SuffixTable::bundled());
}

/// True when `domain` is already in normalized registrable form.
bool is_registrable_domain(std::string_view domain, const SuffixTable& table);

}  // namespace collapse
