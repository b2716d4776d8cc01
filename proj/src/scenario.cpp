#include "qrank/scenario.hpp"

#include <stdexcept>

namespace qrank {

Scenario scenario_from_name(std::string_view name) {
    if (name == "en" || name == "EN") return Scenario::EN;
    if (name == "mt" || name == "MT") return Scenario::MT;
    throw std::runtime_error("unknown scenario: " + std::string(name) + " (expected en or mt)");
}

std::string_view scenario_name(Scenario s) {
    return s == Scenario::EN ? "en" : "mt";
}

}  // namespace qrank
