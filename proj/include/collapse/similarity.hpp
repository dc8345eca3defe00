#pragma once

#include <cstddef>
#include <string_view>

namespace collapse {

/// Total number of characters matched by Ratcliff/Obershelp gestalt pattern
/// matching: take the longest common substring, then recurse on the pieces
/// to its left and to its right.
///
/// Ties between equally long common substrings resolve to the one starting
/// earliest in `a`, then earliest in `b` (the convention of Python's
/// difflib.SequenceMatcher with junk heuristics disabled).
std::size_t gestalt_matches(std::string_view a, std::string_view b);

/// 2*M / (|a| + |b|) with M = gestalt_matches(a, b). Two empty strings are
/// fully similar (1.0).
double ratcliff_obershelp(std::string_view a, std::string_view b);

}  // namespace collapse
