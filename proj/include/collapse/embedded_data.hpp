#pragma once

#include <string_view>

// Data files compiled into the library (see data/ and cmake/EmbedData.cmake).
namespace collapse::embedded {

std::string_view public_suffix_list();
std::string_view fingerprint_keywords();
std::string_view default_plan();

}  // namespace collapse::embedded
