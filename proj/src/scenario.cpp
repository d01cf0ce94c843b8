#include "riccibench/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "riccibench/blocks.hpp"
#include "riccibench/charclasses.hpp"
#include "riccibench/feasibility.hpp"
#include "riccibench/gluing.hpp"

namespace rb {

namespace {

const std::map<std::string, std::set<std::string>> kCommandKeys = {
    {"block", {"block", "params", "family"}},
    {"pipeline", {"graph"}},
    {"scan", {"block", "margins", "box", "budget", "reverify_grid"}},
    {"refine", {"block", "margins", "box", "budget", "target_margin"}},
    {"wu-check", {"variant", "eps", "eps_prime"}},
    {"sw-table", {}},
};
const std::set<std::string> kCommonKeys = {"command", "description", "grid", "seed"};

template <class T>
T field(const json& s, const std::string& key, T def) {
    if (!s.contains(key)) return def;
    try {
        return s.at(key).get<T>();
    } catch (const json::exception&) {
        throw ScenarioError("scenario: '" + key + "' has the wrong type");
    }
}

void validate(const json& s) {
    if (!s.is_object()) throw ScenarioError("scenario: top level must be an object");
    if (!s.contains("command") || !s.at("command").is_string()) throw ScenarioError("scenario: missing command");
    const std::string cmd = s.at("command");
    auto it = kCommandKeys.find(cmd);
    if (it == kCommandKeys.end()) throw ScenarioError("scenario: unknown command '" + cmd + "'");
    for (const auto& [k, v] : s.items())
        if (!kCommonKeys.count(k) && !it->second.count(k))
            throw ScenarioError("scenario: unknown key '" + k + "' for command " + cmd);
    for (const char* k : {"block", "box", "graph", "target_margin"})
        if (it->second.count(k) && !s.contains(k) && std::string(k) != "box")
            if (std::string(k) != "target_margin" || cmd == "refine")
                throw ScenarioError("scenario: command " + cmd + " needs '" + k + "'");
    if ((cmd == "scan" || cmd == "refine") && !s.contains("box")) throw ScenarioError("scenario: command " + cmd + " needs 'box'");
    if (s.contains("params") && !s.at("params").is_object()) throw ScenarioError("scenario: params must be an object");
    if (s.contains("family")) {
        const json& f = s.at("family");
        if (!f.is_object() || f.size() != 1 || !f.begin().value().is_array())
            throw ScenarioError("scenario: family must map one parameter to a list of values");
    }
    if (s.contains("grid") && field<int>(s, "grid", 0) < 8) throw ScenarioError("scenario: grid must be at least 8");
}

std::string num(double x) {
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return os.str();
}

std::string margin_table(const std::vector<Margin>& ms) {
    std::size_t w = 6;
    for (const auto& m : ms) w = std::max(w, m.label.size());
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(w)) << "margin" << "  " << std::setw(14) << "min" << "argmin\n";
    for (const auto& m : ms)
        os << std::setw(static_cast<int>(w)) << m.label << "  " << std::setw(14) << num(m.min) << num(m.argmin)
           << (m.passes() ? "" : "  FAIL") << '\n';
    return os.str();
}

std::string failure_of(const BlockReport& r) {
    for (const auto& m : r.margins)
        if (!m.passes()) return r.block + ": margin " + m.label + " = " + num(m.min) + " at " + num(m.argmin);
    return "";
}

std::string family_tag(const std::string& key, double v) { return key + "=" + num(v); }

ScenarioResult run_block_command(const json& s, int grid) {
    ScenarioResult out;
    const std::string name = field<std::string>(s, "block", "");
    const json params = s.value("params", json::object());
    std::vector<std::pair<std::string, json>> runs;
    if (s.contains("family")) {
        const std::string key = s.at("family").begin().key();
        for (const auto& v : s.at("family").begin().value()) {
            if (!v.is_number()) throw ScenarioError("scenario: family values must be numbers");
            json p = params;
            p[key] = v;
            runs.emplace_back(family_tag(key, v.get<double>()), p);
        }
    } else {
        runs.emplace_back("", params);
    }
    json reports = json::array();
    bool pass = true;
    for (const auto& [tag, p] : runs) {
        BlockReport r;
        try {
            r = run_block(name, p, grid);
        } catch (const ParamError& e) {
            throw ScenarioError(e.what());
        } catch (const std::invalid_argument& e) {
            throw ScenarioError(e.what());
        } catch (const std::exception& e) {
            out.status = kStatusFail;
            out.failure = name + ": " + e.what();
            json j = {{"block", name}, {"params", p}, {"verdict", std::string("error(") + e.what() + ")"}};
            reports.push_back(j);
            out.text += name + (tag.empty() ? "" : " [" + tag + "]") + ": ERROR " + e.what() + "\n";
            pass = false;
            continue;
        }
        json j = to_json(r);
        if (!tag.empty()) j["family"] = tag;
        reports.push_back(j);
        out.text += name + (tag.empty() ? "" : " [" + tag + "]") + ": " + (r.passed() ? "PASS" : "FAIL") + "\n" +
                    margin_table(r.margins);
        for (auto& f : emit_plot_data(r, "", tag.empty() ? "" : "_" + tag)) out.files.push_back(std::move(f));
        if (!r.passed()) {
            pass = false;
            if (out.failure.empty()) out.failure = failure_of(r);
        }
    }
    out.report = s.contains("family") ? json{{"command", "block"}, {"reports", reports}} : reports.front();
    if (!s.contains("family")) out.report["command"] = "block";
    if (!pass) out.status = kStatusFail;
    return out;
}

ScenarioResult run_pipeline_command(const json& s, int grid) {
    ScenarioResult out;
    PipelineGraph g;
    PipelineReport r;
    try {
        g = pipeline_from_json(s.at("graph"));
        r = assemble_pipeline(g, grid);
    } catch (const BlockError& e) {
        out.status = kStatusFail;
        out.failure = std::string("pipeline: ") + e.what();
        out.report = {{"command", "pipeline"}, {"name", g.name}, {"verdict", std::string("error(") + e.what() + ")"}};
        out.text = out.failure + "\n";
        return out;
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(e.what());
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("pipeline: ") + e.what());
    }
    out.report = to_json(r);
    out.report["command"] = "pipeline";
    std::ostringstream os;
    os << "pipeline " << r.name << ": " << (r.passed() ? "PASS" : "FAIL") << '\n';
    for (const auto& b : r.blocks) {
        os << "block " << b.block << ": " << (b.passed() ? "PASS" : "FAIL") << '\n';
        if (!b.passed() && out.failure.empty()) out.failure = failure_of(b);
        for (auto& f : emit_plot_data(b, b.block + ".")) out.files.push_back(std::move(f));
    }
    for (const auto& [e, v] : r.edges) {
        os << "edge " << e.from << " -> " << e.to << " [" << e.kind << "]";
        if (e.kind == "assumed") {
            os << " assumed: " << e.citation << '\n';
            continue;
        }
        os << ": " << (v.passed() ? "PASS" : "FAIL") << '\n' << margin_table(v.margins);
        if (!v.passed() && out.failure.empty())
            for (const auto& m : v.margins)
                if (!m.passes()) {
                    out.failure = "edge " + e.from + " -> " + e.to + ": margin " + m.label + " = " + num(m.min);
                    break;
                }
    }
    out.text = os.str();
    if (!r.passed()) out.status = kStatusFail;
    return out;
}

std::string certificate_table(const Certificate& c, std::size_t rows = 10) {
    std::ostringstream os;
    os << "predicate " << c.predicate.block << ", " << c.sampling << " sampling, " << c.evaluated << " evaluated, "
       << c.passes.size() << " passed\n";
    for (std::size_t i = 0; i < std::min(rows, c.passes.size()); ++i) {
        const Sample& s = c.passes[i];
        os << std::setw(4) << i + 1 << "  " << std::left << std::setw(14) << num(s.score) << std::right;
        for (const auto& [k, v] : s.point) os << "  " << k << "=" << num(v);
        os << "  (" << s.worst << ")\n";
    }
    return os.str();
}

Predicate predicate_of(const json& s) {
    Predicate p;
    p.block = field<std::string>(s, "block", "");
    p.margins = field<std::vector<std::string>>(s, "margins", {});
    return p;
}

ScenarioResult run_search_command(const json& s, int grid, std::uint64_t seed, bool refine_after) {
    ScenarioResult out;
    ParamBox box;
    try {
        box = box_from_json(s.at("box"));
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(e.what());
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("box: ") + e.what());
    }
    const Predicate pred = predicate_of(s);
    const auto budget = field<std::size_t>(s, "budget", box.grid_size());
    Certificate c;
    try {
        c = scan(box, pred, budget, seed, grid);
    } catch (const ParamError& e) {
        throw ScenarioError(e.what());
    }
    out.report = {{"command", refine_after ? "refine" : "scan"}, {"certificate", to_json(c)}};
    out.text = certificate_table(c);
    if (c.empty()) {
        out.status = kStatusFail;
        out.failure = "scan: empty certificate for " + pred.block;
        return out;
    }
    if (!refine_after) {
        const int rg = field<int>(s, "reverify_grid", 2 * grid);
        const Reverification rv = reverify(c, rg);
        out.report["reverification"] = to_json(rv);
        out.text += "re-verified at grid " + std::to_string(rg) + ": " + (rv.all_ok() ? "ok" : "FAILED") + "\n";
        if (!rv.all_ok()) {
            out.status = kStatusFail;
            out.failure = "scan: certificate does not re-verify at grid " + std::to_string(rg);
        }
        return out;
    }
    const double target = field<double>(s, "target_margin", 0.0);
    try {
        const Certificate r = refine(c, target);
        out.report["refined"] = to_json(r);
        out.text += "refined to " + num(r.best()->score) + " in " + std::to_string(r.iterations.size()) + " steps\n" +
                    certificate_table(r, 1);
    } catch (const TargetUnreachable& e) {
        out.report["refined"] = to_json(e.last());
        out.status = kStatusFail;
        out.failure = e.what();
        out.text += std::string(e.what()) + "\n";
    }
    return out;
}

ScenarioResult run_wu_command(const json& s, int grid) {
    json params = {{"variant", field<std::string>(s, "variant", "g00")}};
    if (s.contains("eps")) params["eps"] = s.at("eps");
    if (s.contains("eps_prime")) params["eps_prime"] = s.at("eps_prime");
    ScenarioResult out = run_block_command(json{{"block", "wu"}, {"params", params}}, grid);
    out.report["command"] = "wu-check";
    return out;
}

ScenarioResult run_sw_command() {
    ScenarioResult out;
    const SWTable t = omega9_generator_table();
    out.report = to_json(t);
    out.report["command"] = "sw-table";
    const Mod2Ring W1 = ring_wi(1), W2 = ring_wi(2), CP2 = ring_cpn(2);
    out.report["classes"] = {{"W_1", format(W1, W1.sw)}, {"W_2", format(W2, W2.sw)}, {"CP^2", format(CP2, CP2.sw)}};
    out.text = "w(W_1) = " + format(W1, W1.sw) + "\nw(W_2) = " + format(W2, W2.sw) + "\nw(CP^2) = " + format(CP2, CP2.sw) +
               "\n" + format_table(t);
    return out;
}

}  // namespace

std::vector<OutputFile> emit_plot_data(const BlockReport& r, const std::string& prefix, const std::string& suffix) {
    std::vector<OutputFile> files;
    for (const auto& s : r.sweeps) {
        std::ostringstream os;
        write_sweep_csv(os, s);
        files.push_back({prefix + s.name + suffix + ".csv", os.str()});
    }
    return files;
}

ScenarioResult run_scenario(const json& s, const RunOptions& opt) {
    validate(s);
    const std::string cmd = s.at("command");
    const bool search = cmd == "scan" || cmd == "refine";
    const int grid = opt.grid.value_or(field<int>(s, "grid", search ? kScanGrid : kDefaultGrid));
    if (grid < 8) throw ScenarioError("grid must be at least 8");
    const std::uint64_t seed = opt.seed.value_or(field<std::uint64_t>(s, "seed", 0));
    ScenarioResult out;
    if (cmd == "block") out = run_block_command(s, grid);
    if (cmd == "pipeline") out = run_pipeline_command(s, grid);
    if (cmd == "scan") out = run_search_command(s, grid, seed, false);
    if (cmd == "refine") out = run_search_command(s, grid, seed, true);
    if (cmd == "wu-check") out = run_wu_command(s, grid);
    if (cmd == "sw-table") out = run_sw_command();
    out.report["grid"] = grid;
    out.report["status"] = out.status;
    out.files.insert(out.files.begin(), OutputFile{"report.json", out.report.dump(2) + "\n"});
    return out;
}

ScenarioResult run_scenario_file(const std::string& path, const RunOptions& opt) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot read scenario '" + path + "'");
    json s;
    try {
        s = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ScenarioError("scenario '" + path + "': " + e.what());
    }
    return run_scenario(s, opt);
}

void write_outputs(const ScenarioResult& r, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (const auto& f : r.files) {
        std::ofstream os(fs::path(dir) / f.name, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + (fs::path(dir) / f.name).string());
        os << f.content;
    }
}

}  // namespace rb
