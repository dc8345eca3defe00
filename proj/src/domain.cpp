#include "collapse/domain.hpp"

#include "collapse/embedded_data.hpp"
#include "collapse/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

namespace collapse {

namespace {

constexpr std::string_view kVersionTag = "// VERSION:";

std::string trim(std::string_view text) {
    auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    auto end = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(begin, end - begin + 1));
}

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string_view> split_labels(std::string_view host) {
    std::vector<std::string_view> labels;
    std::size_t start = 0;
    while (true) {
        auto dot = host.find('.', start);
        labels.push_back(host.substr(start, dot == std::string_view::npos ? dot : dot - start));
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return labels;
}

std::string join_from(const std::vector<std::string_view>& labels, std::size_t first) {
    std::string out;
    for (std::size_t i = first; i < labels.size(); ++i) {
        if (i != first) out.push_back('.');
        out.append(labels[i]);
    }
    return out;
}

bool is_ipv4(const std::vector<std::string_view>& labels) {
    if (labels.size() != 4) return false;
    for (auto label : labels) {
        if (label.empty() || label.size() > 3) return false;
        if (!std::all_of(label.begin(), label.end(),
                         [](char c) { return c >= '0' && c <= '9'; }))
            return false;
    }
    return true;
}

}  // namespace

SuffixTable SuffixTable::parse(std::string_view list_text) {
    SuffixTable table;
    std::istringstream in{std::string(list_text)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(kVersionTag, 0) == 0 && table.version_.empty()) {
            table.version_ = trim(std::string_view(line).substr(kVersionTag.size()));
            continue;
        }
        auto rule = trim(line);
        if (rule.empty() || rule.rfind("//", 0) == 0) continue;
        // Rules end at the first whitespace.
        rule = rule.substr(0, rule.find_first_of(" \t"));
        rule = lower(rule);
        if (rule.rfind("!", 0) == 0) {
            table.exceptions_.insert(rule.substr(1));
        } else if (rule.rfind("*.", 0) == 0) {
            table.wildcards_.insert(rule.substr(2));
        } else {
            table.rules_.insert(rule);
        }
    }
    if (table.rule_count() == 0) throw ConfigError("suffix table contains no rules");
    if (table.version_.empty()) table.version_ = "unversioned";
    return table;
}

SuffixTable SuffixTable::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open suffix table: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

const SuffixTable& SuffixTable::bundled() {
    static const SuffixTable table = parse(embedded::public_suffix_list());
    return table;
}

std::size_t SuffixTable::suffix_label_count(const std::vector<std::string_view>& labels) const {
    const std::size_t n = labels.size();
    // Exception rules prevail over everything else; the public suffix is the
    // exception rule minus its leftmost label.
    for (std::size_t i = 0; i < n; ++i) {
        if (exceptions_.contains(join_from(labels, i))) return n - i - 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (rules_.contains(join_from(labels, i))) return n - i;
        if (i + 1 < n && wildcards_.contains(join_from(labels, i + 1))) return n - i;
    }
    return 1;
}

std::string normalize_domain(std::string_view hostname, const SuffixTable& table) {
    std::string host = lower(hostname);
    if (!host.empty() && host.front() == '.') host.erase(0, 1);
    if (!host.empty() && host.back() == '.') host.pop_back();
    if (host.empty()) throw ParseError("malformed hostname '" + std::string(hostname) + "': empty");
    if (host.size() > 253)
        throw ParseError("malformed hostname '" + std::string(hostname) + "': longer than 253 bytes");

    auto labels = split_labels(host);
    for (auto label : labels) {
        if (label.empty())
            throw ParseError("malformed hostname '" + std::string(hostname) + "': empty label");
        if (label.size() > 63)
            throw ParseError("malformed hostname '" + std::string(hostname) + "': label over 63 bytes");
        for (char c : label) {
            bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
            if (!ok) {
                throw ParseError("malformed hostname '" + std::string(hostname) +
                                 "': illegal character '" + std::string(1, c) + "'");
            }
        }
    }
    if (is_ipv4(labels)) return host;

    std::size_t suffix = table.suffix_label_count(labels);
    if (labels.size() <= suffix) return host;
    return join_from(labels, labels.size() - suffix - 1);
}

bool is_registrable_domain(std::string_view domain, const SuffixTable& table) {
    try {
        return normalize_domain(domain, table) == domain;
    } catch (const ParseError&) {
        return false;
    }
}

}  // namespace collapse
