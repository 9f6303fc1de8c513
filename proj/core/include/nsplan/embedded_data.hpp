#pragma once

#include <string_view>

namespace nsplan::embedded {

// Default data files compiled into the library (see core/data/).
std::string_view lexicon_tsv();
std::string_view action_templates_json();

}  // namespace nsplan::embedded
