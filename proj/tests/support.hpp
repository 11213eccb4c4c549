#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "causalspace/spaces.hpp"

namespace testsupport {

using namespace causalspace;

inline History H(const std::string& s) { return parse_history(s); }
inline HistorySet S(const std::string& s) { return parse_space(s); }

inline const nlohmann::json& catalogue() {
    static const nlohmann::json j = [] {
        std::ifstream f(CATALOGUE_JSON);
        return nlohmann::json::parse(f);
    }();
    return j;
}

// Catalogue histories are stored as [["A",1],["C",0]] pairs.
inline History catalogue_history(const nlohmann::json& items) {
    std::vector<HistoryItem> v;
    for (const auto& it : items) v.emplace_back(letter_event(it[0].get<std::string>()[0]), it[1].get<int>());
    return history(v);
}

}  // namespace testsupport
