// Regenerates include/causalspace/catalogue_ids.hpp from the catalogue data.
// Each class representative is rebuilt from the order it is described against
// plus the listed extra extended histories.
//
//   gen_catalogue_ids tests/data/catalogue.json > include/causalspace/catalogue_ids.hpp

#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "causalspace/analysis.hpp"

using namespace causalspace;
using nlohmann::json;

static History json_history(const json& j) {
    std::vector<HistoryItem> items;
    for (const auto& it : j) items.emplace_back(letter_event(it[0].get<std::string>()[0]), it[1].get<int>());
    return history(items);
}

static EventMask json_events(const json& j) {
    EventMask m = 0;
    for (const auto& e : j) m |= 1u << letter_event(e.get<std::string>()[0]);
    return m;
}

static std::optional<HistorySet> rebuild(const CausalOrder& o, const json& bullets) {
    std::vector<History> extra;
    std::set<std::pair<EventMask, EventMask>> want;  // (given, freed)
    for (const auto& b : bullets) {
        for (const auto& h : b["histories"]) extra.push_back(json_history(h));
        want.emplace(json_events(b["given"]), json_events(b["freed"]));
    }
    HistorySet theta = apply_order_diff(o, extra);
    if (!is_free_choice(theta, full_mask(3)) || !is_causally_complete(theta)) return std::nullopt;
    if (ext(theta) - ext_hist_space(o) != hset(extra)) return std::nullopt;
    std::set<std::pair<EventMask, EventMask>> got;
    for (const auto& d : diff_from_order(theta, o)) got.emplace(d.given, d.freed);
    if (got != want) return std::nullopt;
    return theta;
}

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: gen_catalogue_ids catalogue.json\n";
        return 2;
    }
    std::ifstream in(argv[1]);
    json cat = json::parse(in);
    PermGroup g(3);
    std::vector<std::uint64_t> reps;
    std::set<HistorySet> seen;
    for (const auto& rec : cat) {
        std::vector<CausalOrder> candidates;
        try {
            candidates.push_back(parse_order(rec["order"].get<std::string>()));
        } catch (const std::invalid_argument&) {
            // Malformed label: try every total order on the three events.
            std::vector<Event> p{0, 1, 2};
            do candidates.push_back(total_order(p));
            while (std::next_permutation(p.begin(), p.end()));
        }
        std::optional<HistorySet> found;
        for (const auto& o : candidates) {
            auto theta = rebuild(o, rec["bullets"]);
            if (!theta) continue;
            if (orbit(*theta, g).size() != rec["class_size"].get<std::size_t>()) continue;
            if (causaltope_dim(*theta, 3) != rec["dim"].get<int>()) continue;
            if (count_causal_functions(*theta) != rec["causal_functions"].get<std::uint64_t>()) continue;
            if (found && *found != *theta) {
                std::cerr << "class " << rec["id"] << ": ambiguous order label\n";
                return 1;
            }
            found = theta;
            if (candidates.size() > 1) std::cerr << "class " << rec["id"] << ": resolved to " << order_to_string(o) << "\n";
        }
        if (!found) {
            std::cerr << "class " << rec["id"] << ": could not rebuild the space\n";
            return 1;
        }
        if (!seen.insert(canonical_rep(*found, g)).second) {
            std::cerr << "class " << rec["id"] << ": duplicate orbit\n";
            return 1;
        }
        reps.push_back(found->to_u64());
    }
    std::cout << "#pragma once\n\n#include <cstdint>\n#include <vector>\n\nnamespace causalspace {\n\n"
              << "// Representatives of the 102 classes of causally complete spaces on 3 events,\n"
              << "// indexed by their catalogue number. Generated by tools/dev/gen_catalogue_ids.\n"
              << "inline const std::vector<std::uint64_t>& catalogue_representatives() {\n"
              << "    static const std::vector<std::uint64_t> reps{\n";
    for (std::size_t i = 0; i < reps.size(); ++i)
        std::cout << (i % 4 == 0 ? "        " : " ") << reps[i] << "ull," << (i % 4 == 3 || i + 1 == reps.size() ? "\n" : "");
    std::cout << "    };\n    return reps;\n}\n\n}  // namespace causalspace\n";
    return 0;
}
