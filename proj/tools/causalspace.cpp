#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "causalspace/analysis.hpp"
#include "causalspace/causaltope.hpp"
#include "causalspace/enumerator.hpp"
#include "causalspace/orders.hpp"
#include "causalspace/spaces.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace causalspace;

namespace {

struct RunConfig {
    int events = 3;
    std::string state_file;
    std::uint64_t save_period = 0;
    std::uint64_t update_period = 0;
    std::string format = "text";
    std::string output;
    bool parallel = false;
    bool quiet = false;
};

std::optional<fs::path> state_dir() {
    const char* d = std::getenv("CAUSALSPACE_STATE_DIR");
    if (!d || !*d) return std::nullopt;
    return fs::path(d);
}

std::string default_state_file(int n) {
    auto d = state_dir();
    return d ? (*d / ("search-" + std::to_string(n) + ".state")).string() : std::string{};
}

std::string default_classes_file(int n) {
    auto d = state_dir();
    return d ? (*d / ("classes-" + std::to_string(n) + ".hsets")).string() : std::string{};
}

void require_format(const std::string& f, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (f == a) return;
    throw std::invalid_argument("unsupported format '" + f + "' for this command");
}

void emit(const RunConfig& cfg, const std::string& text) {
    if (cfg.output.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + cfg.output + "'");
    out << text;
    if (!out) throw std::runtime_error("failed writing '" + cfg.output + "'");
}

void write_classes(const std::vector<HistorySet>& reps, const std::string& path) {
    if (path.empty()) return;
    std::vector<std::uint8_t> bytes;
    write_hsets(bytes, reps);
    write_file_bytes(path, bytes);
}

// Class representatives: from the state directory when a finished run left
// them there, otherwise by enumerating.
std::vector<HistorySet> load_or_enumerate(int n) {
    std::string path = default_classes_file(n);
    if (!path.empty() && fs::exists(path)) return read_hsets(read_file_bytes(path));
    return enumerate_classes(n).reps;
}

std::string finish_line(std::uint64_t spaces, std::uint64_t classes) {
    return "Found " + std::to_string(spaces) + " spaces in " + std::to_string(classes) + " equivalence classes.\n";
}

int run_search(const RunConfig& cfg, bool resume) {
    std::string state = cfg.state_file.empty() ? default_state_file(cfg.events) : cfg.state_file;
    if (resume && state.empty()) throw std::invalid_argument("resume needs --state or CAUSALSPACE_STATE_DIR");
    std::vector<HistorySet> reps;
    if (cfg.parallel && !resume) {
        if (cfg.save_period) throw std::invalid_argument("--parallel cannot checkpoint; drop --save-period");
        auto r = enumerate_classes_parallel(cfg.events);
        if (!cfg.quiet) std::cout << finish_line(r.num_spaces, r.reps.size());
        reps = r.reps;
    } else {
        FinderOptions o;
        o.verbose = !cfg.quiet;
        if (cfg.update_period) o.update_period = cfg.update_period;
        if (!state.empty()) o.filename = state;
        if (cfg.save_period) {
            if (state.empty()) throw std::invalid_argument("--save-period needs --state or CAUSALSPACE_STATE_DIR");
            o.save_period = cfg.save_period;
        }
        SpaceFinder f(cfg.events, o);
        if (resume)
            f.load_state(state);
        else
            f.blank_state();
        f.find_eq_classes();
        reps = f.eq_classes();
    }
    std::string out = cfg.output.empty() ? default_classes_file(cfg.events) : cfg.output;
    write_classes(reps, out);
    return 0;
}

HistorySet resolve_target(const std::string& target, const Hierarchy& h) {
    bool digits = !target.empty() && std::all_of(target.begin(), target.end(), [](char c) { return c >= '0' && c <= '9'; });
    if (digits && target.size() <= 6) {
        int id = std::stoi(target);
        if (id < static_cast<int>(h.num_classes())) return h.node(id).representative;
    }
    HistorySet s = parse_space(target);
    if (!h.index_of(s)) throw std::invalid_argument("'" + target + "' is neither a class id nor a causally complete space");
    return s;
}

json history_list(const std::vector<History>& hs) {
    json a = json::array();
    for (History x : hs) a.push_back(history_to_string(x));
    return a;
}

json report_json(const SpaceReport& r) {
    json j;
    j["class_id"] = r.class_id;
    j["class_size"] = r.class_size;
    j["space"] = space_to_string(r.space);
    j["bitvec"] = r.space.to_decimal();
    j["induced"] = r.induced;
    j["order"] = r.order ? json(order_to_string(*r.order)) : json(nullptr);
    j["order_definite"] = r.order_definite;
    j["order_space_class"] = r.order_space_class ? json(*r.order_space_class) : json(nullptr);
    json oc = json::array();
    for (const auto& o : r.closest_order_coarsenings) oc.push_back(order_to_string(o));
    j["closest_order_coarsenings"] = oc;
    json bullets = json::array();
    for (const auto& b : r.bullets)
        bullets.push_back({{"outputs", detail::mask_letters(b.outputs)},
                           {"freed", detail::mask_letters(b.freed)},
                           {"given", detail::mask_letters(b.given)},
                           {"histories", history_list(b.histories)}});
    j["differences"] = bullets;
    j["dim"] = r.dim;
    j["total_eqs"] = r.total_eqs;
    j["indep_eqs"] = r.indep_eqs;
    j["refinements"] = r.refinements;
    j["coarsenings"] = r.coarsenings;
    j["is_minimum"] = r.is_minimum;
    j["is_maximum"] = r.is_maximum;
    j["is_join_of_refinements"] = r.is_join_of_refinements ? json(*r.is_join_of_refinements) : json(nullptr);
    j["is_meet_of_coarsenings"] = r.is_meet_of_coarsenings ? json(*r.is_meet_of_coarsenings) : json(nullptr);
    j["causal_functions"] = r.causal_functions;
    j["novel_causal_functions"] = r.novel_causal_functions ? json(*r.novel_causal_functions) : json(nullptr);
    j["tight"] = r.tight;
    json ids = json::array();
    for (const auto& id : r.identifications)
        ids.push_back({{"event", std::string(1, event_letter(id.event))}, {"histories", history_list(id.histories)}});
    j["identifications"] = ids;
    return j;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    return s;
}

std::string report_text(const SpaceReport& r) {
    std::ostringstream o;
    o << "Space " << r.class_id << " (class of " << r.class_size << " spaces)\n";
    o << "  histories: " << space_to_string(r.space) << "\n";
    if (r.induced)
        o << "  induced by " << order_to_string(*r.order) << "\n";
    else if (r.order)
        o << "  refines the space of " << order_to_string(*r.order) << (r.order_definite ? "" : " (indefinite)") << "\n";
    for (const auto& b : r.bullets) {
        o << "    outputs at " << detail::mask_letters(b.outputs) << " ignore inputs at " << detail::mask_letters(b.freed) << " given";
        for (std::size_t i = 0; i < b.histories.size(); ++i) o << (i ? ", " : " ") << history_to_string(b.histories[i]);
        o << "\n";
    }
    o << "  causaltope: dim " << r.dim << ", " << r.indep_eqs << " of " << r.total_eqs << " equations independent\n";
    o << "  closest refinements: " << (r.refinements.empty() ? "none (minimum)" : join_ints(r.refinements)) << "\n";
    o << "  closest coarsenings: " << (r.coarsenings.empty() ? "none (maximum)" : join_ints(r.coarsenings)) << "\n";
    o << "  causal functions: " << r.causal_functions;
    if (r.novel_causal_functions) o << " (" << *r.novel_causal_functions << " not causal for any refinement)";
    o << "\n  " << (r.tight ? "tight" : "not tight") << "\n";
    for (const auto& id : r.identifications) {
        o << "    " << event_letter(id.event) << " identifies";
        for (History x : id.histories) o << " " << history_to_string(x);
        o << "\n";
    }
    return o.str();
}

int cmd_classify(const RunConfig& cfg, const std::string& target) {
    require_format(cfg.format, {"text", "json"});
    Hierarchy h(cfg.events, load_or_enumerate(cfg.events));
    SpaceReport r = report(resolve_target(target, h), h);
    emit(cfg, cfg.format == "json" ? report_json(r).dump(2) + "\n" : report_text(r));
    return 0;
}

int cmd_hierarchy(const RunConfig& cfg) {
    require_format(cfg.format, {"text", "json", "dot"});
    Hierarchy h(cfg.events, load_or_enumerate(cfg.events));
    std::ostringstream o;
    if (cfg.format == "dot") {
        o << "digraph hierarchy {\n";
        for (const auto& nd : h.nodes()) o << "  " << nd.class_id << " [label=\"" << nd.class_id << "\"];\n";
        for (auto [a, b] : h.class_edges()) o << "  " << a << " -> " << b << ";\n";
        o << "}\n";
    } else if (cfg.format == "json") {
        json arr = json::array();
        for (const auto& nd : h.nodes())
            arr.push_back({{"class_id", nd.class_id},
                           {"representative", nd.representative.to_decimal()},
                           {"orbit_size", nd.orbit_size},
                           {"closest_refinements", nd.closest_refinements},
                           {"closest_coarsenings", nd.closest_coarsenings},
                           {"is_tight", nd.is_tight},
                           {"induced_by_order", nd.induced_by_order ? json(order_to_string(*nd.induced_by_order)) : json(nullptr)},
                           {"causal_function_count", nd.causal_function_count},
                           {"novel_causal_function_count", nd.novel_causal_function_count},
                           {"causaltope_dim", nd.causaltope_dim}});
        o << arr.dump(2) << "\n";
    } else {
        for (const auto& nd : h.nodes())
            o << nd.class_id << ": size " << nd.orbit_size << ", dim " << nd.causaltope_dim << ", CF "
              << nd.causal_function_count << ", coarsenings [" << join_ints(nd.closest_coarsenings) << "]\n";
    }
    emit(cfg, o.str());
    return 0;
}

int cmd_causaltope(const RunConfig& cfg, const std::string& target) {
    require_format(cfg.format, {"text", "json", "csv", "pgm"});
    Hierarchy h(cfg.events, load_or_enumerate(cfg.events));
    HistorySet s = resolve_target(target, h);
    LinearSystem sys = build_equations(s, cfg.events);
    if (cfg.format == "csv" || cfg.format == "pgm") {
        emit(cfg, dump_system(sys, cfg.format));
        return 0;
    }
    std::size_t r = rank(sys);
    int dim = static_cast<int>(sys.num_cols) - static_cast<int>(r) - 1;
    if (cfg.format == "json")
        emit(cfg, json{{"class_id", h.class_of(s)}, {"total_eqs", sys.rows.size()}, {"indep_eqs", r}, {"dim", dim}}.dump(2) + "\n");
    else
        emit(cfg, "Space " + std::to_string(h.class_of(s)) + ": " + std::to_string(sys.rows.size()) + " equations, " +
                      std::to_string(r) + " independent, dimension " + std::to_string(dim) + "\n");
    return 0;
}

int cmd_orders(const RunConfig& cfg) {
    require_format(cfg.format, {"text", "json", "dot"});
    OrderHierarchy oh = order_hierarchy(cfg.events);
    std::ostringstream o;
    if (cfg.format == "dot") {
        o << "digraph orders {\n";
        for (std::size_t i = 0; i < oh.orders.size(); ++i)
            o << "  " << i << " [label=\"" << order_to_string(oh.orders[i]) << "\"];\n";
        for (auto [a, b] : oh.covers) o << "  " << a << " -> " << b << ";\n";
        o << "}\n";
    } else if (cfg.format == "json") {
        json arr = json::array();
        for (std::size_t i = 0; i < oh.orders.size(); ++i) {
            json above = json::array();
            for (auto [a, b] : oh.covers)
                if (a == i) above.push_back(b);
            arr.push_back({{"id", i}, {"order", order_to_string(oh.orders[i])}, {"definite", is_definite(oh.orders[i])},
                           {"covered_by", above}});
        }
        o << arr.dump(2) << "\n";
    } else {
        for (std::size_t i = 0; i < oh.orders.size(); ++i) o << i << ": " << order_to_string(oh.orders[i]) << "\n";
    }
    emit(cfg, o.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causally complete spaces: enumeration, hierarchy and causaltopes"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string target;

    auto add_events = [&](CLI::App* c) {
        c->add_option("--events,-n", cfg.events, "number of events")->check(CLI::Range(1, 4));
    };
    auto add_format = [&](CLI::App* c, const std::string& def) {
        c->add_option("--format", cfg.format, "json | dot | csv | text (pgm for causaltope)")->default_str(def);
        c->add_option("--output,-o", cfg.output, "write to this file instead of stdout");
    };
    auto add_search = [&](CLI::App* c) {
        c->add_option("--state", cfg.state_file, "checkpoint file");
        c->add_option("--save-period", cfg.save_period, "classes between checkpoints")->check(CLI::PositiveNumber);
        c->add_option("--update-period", cfg.update_period, "classes between status lines")->check(CLI::PositiveNumber);
        c->add_option("--output,-o", cfg.output, "write class representatives here (hsets format)");
        c->add_flag("--quiet,-q", cfg.quiet, "no status table");
    };

    auto* en = app.add_subcommand("enumerate", "enumerate causally complete spaces");
    add_events(en);
    add_search(en);
    en->add_flag("--parallel", cfg.parallel, "search top-level choices on all cores");
    auto* re = app.add_subcommand("resume", "continue a checkpointed search");
    add_events(re);
    add_search(re);
    auto* cl = app.add_subcommand("classify", "report on a class id or space literal");
    add_events(cl);
    add_format(cl, "text");
    cl->add_option("target", target, "class id, decimal bitvector or [A/0, <A/1,B/0>, ...]")->required();
    auto* hi = app.add_subcommand("hierarchy", "export the condensed hierarchy");
    add_events(hi);
    add_format(hi, "text");
    auto* ct = app.add_subcommand("causaltope", "causality equations of a space");
    add_events(ct);
    add_format(ct, "text");
    ct->add_option("target", target, "class id or space literal")->required();
    auto* od = app.add_subcommand("orders", "export the hierarchy of causal orders");
    add_events(od);
    add_format(od, "text");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // help and version exit 0; every usage error is an invalid argument
        return app.exit(e) == 0 ? 0 : 2;
    }
    try {
        if (*en) return run_search(cfg, false);
        if (*re) return run_search(cfg, true);
        if (*cl) return cmd_classify(cfg, target);
        if (*hi) return cmd_hierarchy(cfg);
        if (*ct) return cmd_causaltope(cfg, target);
        if (*od) return cmd_orders(cfg);
    } catch (const CorruptFileError& e) {
        std::cerr << "corrupt file: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
