#pragma once

#include <string>
#include <string_view>

namespace qrank {

// Query-side language scenario: original English or machine-translated.
enum class Scenario { EN, MT };

Scenario scenario_from_name(std::string_view name);
std::string_view scenario_name(Scenario s);

}  // namespace qrank
