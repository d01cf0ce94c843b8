#include "riccibench/gluing.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <sstream>

#include "riccibench/blocks.hpp"

namespace rb {

bool GluingVerdict::passed() const {
    if (kind == "assumed") return true;
    return std::all_of(margins.begin(), margins.end(), [](const Margin& m) { return m.passes(); });
}

const Margin* GluingVerdict::margin(const std::string& label) const {
    for (const auto& m : margins)
        if (m.label == label) return &m;
    return nullptr;
}

json to_json(const GluingVerdict& v) {
    json j = {{"kind", v.kind}, {"verdict", v.passed() ? "pass" : "fail"}};
    j["margins"] = json::array();
    for (const auto& m : v.margins) j["margins"].push_back(to_json(m));
    j["flags"] = v.flags;
    j["notes"] = v.notes;
    return j;
}

namespace {

bool param_is_arclength(const FaceProfile& f) { return !f.metric.count("speed"); }

double at(const std::vector<double>& v, std::size_t i) { return v.size() == 1 ? v[0] : v.at(i); }

// f2's descriptor values resampled onto f1's parameter grid
std::vector<double> resample(const FaceProfile& from, const std::vector<double>& vals, const std::vector<double>& onto) {
    if (vals.size() == 1) return std::vector<double>(onto.size(), vals[0]);
    if (vals.size() != from.param.size()) throw DescriptorMismatch("face '" + from.id + "': descriptor length differs from its grid");
    std::vector<double> out;
    out.reserve(onto.size());
    const auto& x = from.param;
    for (double t : onto) {
        const double span = std::max(1.0, std::abs(x.back() - x.front()));
        if (t < x.front() - 1e-9 * span || t > x.back() + 1e-9 * span)
            throw DescriptorMismatch("face '" + from.id + "': parameter domains differ");
        auto it = std::lower_bound(x.begin(), x.end(), t);
        if (it == x.begin()) {
            out.push_back(vals.front());
            continue;
        }
        if (it == x.end()) {
            out.push_back(vals.back());
            continue;
        }
        const std::size_t k = static_cast<std::size_t>(it - x.begin());
        const double w = (t - x[k - 1]) / (x[k] - x[k - 1]);
        out.push_back((1.0 - w) * vals[k - 1] + w * vals[k]);
    }
    return out;
}

std::vector<double> grid_of(const FaceProfile& f) { return f.param.empty() ? std::vector<double>{0.0} : f.param; }

// family-wise II with "all" standing for every family
std::vector<std::string> ii_families(const FaceProfile& a, const FaceProfile& b) {
    std::vector<std::string> out;
    for (const auto* f : {&a, &b})
        for (const auto& [k, v] : f->ii)
            if (k != "all" && std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    if (out.empty()) out.push_back("all");
    return out;
}

const std::vector<double>& ii_of(const FaceProfile& f, const std::string& family) {
    auto it = f.ii.find(family);
    if (it != f.ii.end()) return it->second;
    it = f.ii.find("all");
    if (it != f.ii.end()) return it->second;
    throw DescriptorMismatch("face '" + f.id + "' has no II data for family '" + family + "'");
}

void check_compatible(const FaceProfile& a, const FaceProfile& b) {
    if (a.kind != b.kind)
        throw DescriptorMismatch("incompatible face kinds: " + to_string(a.kind) + " vs " + to_string(b.kind));
    if (a.dimension != b.dimension) throw DescriptorMismatch("faces '" + a.id + "' and '" + b.id + "' differ in dimension");
}

Margin isometry_margin(const FaceProfile& a, const FaceProfile& b, double tol) {
    std::vector<std::string> ka, kb;
    for (const auto& [k, v] : a.metric) ka.push_back(k);
    for (const auto& [k, v] : b.metric) kb.push_back(k);
    if (ka != kb) throw DescriptorMismatch("faces '" + a.id + "' and '" + b.id + "' carry different metric descriptors");
    const auto ts = grid_of(a);
    Margin m{"isometry"};
    for (const auto& [k, va] : a.metric) {
        const auto vb = resample(b, b.metric.at(k), ts);
        for (std::size_t i = 0; i < ts.size(); ++i) m.update(tol - std::abs(at(va, i) - vb[i]), ts[i]);
    }
    if (a.param.size() > 1 && b.param.size() > 1) {
        const double span_a = a.param.back() - a.param.front(), span_b = b.param.back() - b.param.front();
        m.update(tol - std::abs(span_a - span_b), a.param.front());
    }
    return m;
}

std::vector<Margin> ii_sum_margins(const FaceProfile& a, const FaceProfile& b, double offset, const std::string& tag) {
    const auto ts = grid_of(a);
    std::vector<Margin> out;
    for (const auto& fam : ii_families(a, b)) {
        const auto& va = ii_of(a, fam);
        const auto vb = resample(b, ii_of(b, fam), ts);
        Margin m{tag + "[" + fam + "]"};
        const std::size_t n = va.size() == 1 ? ts.size() : va.size();
        for (std::size_t i = 0; i < n; ++i) m.update(at(va, i) + vb[std::min(i, vb.size() - 1)] + offset, ts[std::min(i, ts.size() - 1)]);
        out.push_back(m);
    }
    return out;
}

// II of a face near one of its ends (the given fraction of the parameter range)
Margin ii_near_end(const FaceProfile& f, const std::string& end, double band, double tol, const std::string& label) {
    Margin m{label};
    const auto ts = grid_of(f);
    const double lo = ts.front(), hi = ts.back(), span = hi - lo;
    for (const auto& [fam, vals] : f.ii) {
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const bool near = end == "lo" ? ts[i] <= lo + band * span : ts[i] >= hi - band * span;
            if (near) m.update(at(vals, i) - tol, ts[i]);
        }
    }
    return m;
}

const FaceProfile& face_or_throw(const BoundaryProfile& b, const std::string& id) {
    const FaceProfile* f = b.face(id);
    if (!f) throw DescriptorMismatch("no face '" + id + "' in profile");
    return *f;
}

}  // namespace

FaceProfile rescaled(const FaceProfile& f, double R) {
    if (!(R > 0.0)) throw std::invalid_argument("rescaled: R must be positive");
    FaceProfile out = f;
    const bool arc = param_is_arclength(f);
    if (arc)
        for (auto& t : out.param) t *= R;
    for (auto& [k, v] : out.metric)
        for (auto& x : v) x *= R;
    for (auto& [k, v] : out.ii)
        for (auto& x : v) x /= R;
    for (auto& [k, j] : out.end_jets) {
        if (arc)
            j = Jet{R * j[0], j[1], j[2] / R, j[3] / (R * R)};
        else
            j = Jet{R * j[0], R * j[1], R * j[2], R * j[3]};
    }
    return out;
}

BoundaryProfile rescaled(const BoundaryProfile& b, double R) {
    BoundaryProfile out = b;
    for (auto& f : out.faces) f = rescaled(f, R);
    return out;
}

GluingVerdict check_perelman(const FaceProfile& f1, const FaceProfile& f2, double rescale, double tol, double ii_tol) {
    GluingVerdict v;
    v.kind = "perelman";
    const FaceProfile g2 = rescaled(f2, rescale);
    check_compatible(f1, g2);
    v.margins.push_back(isometry_margin(f1, g2, tol));
    for (auto& m : ii_sum_margins(f1, g2, ii_tol + kNonstrictSlack, "II_sum")) v.margins.push_back(m);
    return v;
}

GluingVerdict check_perelman(const BoundaryProfile& b1, const std::string& face1, const BoundaryProfile& b2,
                             const std::string& face2, double rescale, double tol, double ii_tol) {
    return check_perelman(face_or_throw(b1, face1), face_or_throw(b2, face2), rescale, tol, ii_tol);
}

bool warped_concave(const FaceProfile& f) {
    auto it = f.metric.find("warp");
    if (it == f.metric.end() || it->second.size() < 3 || f.param.size() != it->second.size()) return false;
    const auto& w = it->second;
    std::vector<double> sigma(f.param.size(), 0.0);
    if (param_is_arclength(f)) {
        sigma = f.param;
    } else {
        const auto& sp = f.metric.at("speed");
        for (std::size_t i = 1; i < sigma.size(); ++i)
            sigma[i] = sigma[i - 1] + 0.5 * (at(sp, i) + at(sp, i - 1)) * (f.param[i] - f.param[i - 1]);
    }
    for (std::size_t i = 1; i + 1 < w.size(); ++i) {
        const double d1 = (w[i] - w[i - 1]) / (sigma[i] - sigma[i - 1]);
        const double d2 = (w[i + 1] - w[i]) / (sigma[i + 1] - sigma[i]);
        if (!(d2 < d1)) return false;
    }
    return true;
}

GluingVerdict check_corner_gluing(const BoundaryProfile& b1, const std::string& face1, const BoundaryProfile& b2,
                                  const std::string& face2, double rescale, double tol) {
    GluingVerdict v;
    v.kind = "corner";
    const BoundaryProfile c2 = rescaled(b2, rescale);
    const FaceProfile& s1 = face_or_throw(b1, face1);
    const FaceProfile& s2 = face_or_throw(c2, face2);
    check_compatible(s1, s2);
    v.margins.push_back(isometry_margin(s1, s2, tol));
    for (auto& m : ii_sum_margins(s1, s2, -tol, "II_sum")) v.margins.push_back(m);

    if (s1.corner_end.empty() || s2.corner_end.empty()) throw DescriptorMismatch("corner gluing: missing corner data");
    std::vector<const Corner*> k1, k2;
    for (const auto& [id, end] : s1.corner_end) {
        const Corner* c = b1.corner(id);
        if (!c) throw DescriptorMismatch("corner gluing: corner '" + id + "' not declared");
        k1.push_back(c);
    }
    for (const auto& [id, end] : s2.corner_end) {
        const Corner* c = c2.corner(id);
        if (!c) throw DescriptorMismatch("corner gluing: corner '" + id + "' not declared");
        k2.push_back(c);
    }
    if (k1.size() != k2.size()) throw DescriptorMismatch("corner gluing: corner counts differ on the shared face");

    std::vector<const FaceProfile*> adjacent;
    for (std::size_t i = 0; i < k1.size(); ++i) {
        const Corner& a = *k1[i];
        const Corner& b = *k2[i];
        Margin m{"angle_sum[" + a.id + "+" + b.id + "]"};
        const std::size_t n = std::max(a.angle.size(), b.angle.size());
        for (std::size_t j = 0; j < n; ++j) m.update(M_PI - tol - (at(a.angle, j) + at(b.angle, j)), static_cast<double>(j));
        v.margins.push_back(m);
        for (const auto& [prof, corner, shared] :
             {std::tuple{&b1, &a, &s1}, std::tuple{&c2, &b, &s2}}) {
            for (const auto& fid : corner->faces) {
                if (fid == shared->id) continue;
                const FaceProfile& adj = face_or_throw(*prof, fid);
                auto it = adj.corner_end.find(corner->id);
                if (it == adj.corner_end.end())
                    throw DescriptorMismatch("corner gluing: face '" + fid + "' does not mark corner '" + corner->id + "'");
                v.margins.push_back(ii_near_end(adj, it->second, kCornerBand, tol, "adjacent_II[" + fid + "]"));
                adjacent.push_back(&adj);
            }
        }
    }
    if (adjacent.size() >= 2 && std::all_of(adjacent.begin(), adjacent.end(), [](const FaceProfile* f) { return warped_concave(*f); }))
        v.flags.push_back("warped, concave");
    return v;
}

GluingVerdict check_smooth_match(const FaceProfile& f1, const FaceProfile& f2, double tol) {
    GluingVerdict v;
    v.kind = "smooth-match";
    check_compatible(f1, f2);
    bool any = false;
    for (const auto& [k, j1] : f1.end_jets) {
        auto it = f2.end_jets.find(k);
        if (it == f2.end_jets.end()) continue;
        any = true;
        const Jet& j2 = it->second;
        v.margins.push_back(Margin{"value[" + k + "]", tol - std::abs(j1[0] - j2[0]), 0.0});
        const double d1 = std::max({std::abs(j1[1]), std::abs(j1[2]), std::abs(j1[3])});
        const double d2 = std::max({std::abs(j2[1]), std::abs(j2[2]), std::abs(j2[3])});
        v.margins.push_back(Margin{"flat_first[" + k + "]", tol - d1, 0.0});
        v.margins.push_back(Margin{"flat_second[" + k + "]", tol - d2, 0.0});
    }
    if (!any) throw DescriptorMismatch("smooth-match: faces '" + f1.id + "' and '" + f2.id + "' share no end jets");
    return v;
}

// ---- pipelines ----------------------------------------------------------------------

namespace {

const std::vector<std::string> kEdgeKinds = {"perelman", "corner", "smooth-match", "assumed"};

std::pair<std::string, std::string> split_ref(const std::string& s) {
    const auto dot = s.find('.');
    if (dot == std::string::npos) throw std::invalid_argument("pipeline: endpoint '" + s + "' must be node.face");
    return {s.substr(0, dot), s.substr(dot + 1)};
}

// "@node.aux.key" or "1/@node.aux.key"
std::optional<double> resolve_ref(const json& v, const std::map<std::string, BlockReport>& built) {
    if (!v.is_string()) return std::nullopt;
    std::string s = v.get<std::string>();
    bool inverse = false;
    if (s.rfind("1/", 0) == 0) {
        inverse = true;
        s = s.substr(2);
    }
    if (s.empty() || s[0] != '@') return std::nullopt;
    s = s.substr(1);
    const auto p1 = s.find(".aux.");
    if (p1 == std::string::npos) throw std::invalid_argument("pipeline: reference '" + s + "' must be @node.aux.key");
    const std::string node = s.substr(0, p1), key = s.substr(p1 + 5);
    auto it = built.find(node);
    if (it == built.end()) throw std::invalid_argument("pipeline: reference to unbuilt node '" + node + "'");
    auto a = it->second.aux.find(key);
    if (a == it->second.aux.end()) throw std::invalid_argument("pipeline: node '" + node + "' has no aux '" + key + "'");
    return inverse ? 1.0 / a->second : a->second;
}

json resolve_params(const json& j, const std::map<std::string, BlockReport>& built) {
    if (j.is_object()) {
        json out = json::object();
        for (const auto& [k, v] : j.items()) out[k] = resolve_params(v, built);
        return out;
    }
    if (auto v = resolve_ref(j, built)) return *v;
    return j;
}

// node ids referenced by "@..." strings
void collect_refs(const json& j, std::vector<std::string>& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) collect_refs(v, out);
    } else if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s.rfind("1/", 0) == 0) s = s.substr(2);
        if (!s.empty() && s[0] == '@') out.push_back(s.substr(1, s.find('.') - 1));
    }
}

}  // namespace

PipelineGraph pipeline_from_json(const json& j) {
    PipelineGraph g;
    g.name = j.value("name", std::string("pipeline"));
    for (const auto& n : j.at("nodes")) {
        PipelineNode node;
        node.id = n.at("id").get<std::string>();
        node.trusted = n.value("trusted", false);
        node.block = n.value("block", std::string());
        node.params = n.value("params", json::object());
        node.citation = n.value("citation", std::string());
        if (n.contains("boundary")) node.declared = boundary_from_json(n.at("boundary"));
        if (node.trusted == !node.block.empty())
            throw std::invalid_argument("pipeline: node '" + node.id + "' must be either trusted or name a block");
        g.nodes.push_back(std::move(node));
    }
    for (const auto& e : j.at("edges")) {
        PipelineEdge edge;
        edge.from = e.at("from").get<std::string>();
        edge.to = e.at("to").get<std::string>();
        edge.kind = e.at("kind").get<std::string>();
        if (std::find(kEdgeKinds.begin(), kEdgeKinds.end(), edge.kind) == kEdgeKinds.end())
            throw std::invalid_argument("pipeline: unknown edge kind '" + edge.kind + "'");
        edge.citation = e.value("citation", std::string());
        if (e.contains("rescale")) {
            if (e.at("rescale").is_number())
                edge.rescale = e.at("rescale").get<double>();
            else
                edge.rescale_ref = e.at("rescale").get<std::string>();
        }
        if (edge.kind == "assumed" && edge.citation.empty())
            throw std::invalid_argument("pipeline: assumed edge " + edge.from + " -> " + edge.to + " needs a citation");
        g.edges.push_back(std::move(edge));
    }
    return g;
}

json to_json(const PipelineGraph& g) {
    json j = {{"name", g.name}, {"nodes", json::array()}, {"edges", json::array()}};
    for (const auto& n : g.nodes) {
        json x = {{"id", n.id}};
        if (n.trusted) {
            x["trusted"] = true;
            x["citation"] = n.citation;
            if (n.declared) x["boundary"] = to_json(*n.declared);
        } else {
            x["block"] = n.block;
            x["params"] = n.params;
        }
        j["nodes"].push_back(x);
    }
    for (const auto& e : g.edges) {
        json x = {{"from", e.from}, {"to", e.to}, {"kind", e.kind}};
        if (e.rescale_ref.empty())
            x["rescale"] = e.rescale;
        else
            x["rescale"] = e.rescale_ref;
        if (!e.citation.empty()) x["citation"] = e.citation;
        j["edges"].push_back(x);
    }
    return j;
}

bool PipelineReport::passed() const {
    for (const auto& b : blocks)
        if (!b.passed()) return false;
    for (const auto& [e, v] : edges)
        if (e.kind != "assumed" && !v.passed()) return false;
    return true;
}

json to_json(const PipelineReport& r) {
    json j = {{"name", r.name}, {"verdict", r.passed() ? "pass" : "fail"}};
    j["blocks"] = json::array();
    for (const auto& b : r.blocks) j["blocks"].push_back(to_json(b));
    j["edges"] = json::array();
    j["assumed"] = json::array();
    for (const auto& [e, v] : r.edges) {
        json x = {{"from", e.from}, {"to", e.to}, {"kind", e.kind}, {"rescale", e.rescale}};
        if (!e.citation.empty()) x["citation"] = e.citation;
        const json vj = to_json(v);
        for (const auto& [k, val] : vj.items()) x[k] = val;
        j["edges"].push_back(x);
        if (e.kind == "assumed") j["assumed"].push_back({{"from", e.from}, {"to", e.to}, {"citation", e.citation}});
    }
    return j;
}

PipelineReport assemble_pipeline(const PipelineGraph& g, int grid) {
    std::map<std::string, const PipelineNode*> by_id;
    for (const auto& n : g.nodes)
        if (!by_id.emplace(n.id, &n).second) throw std::invalid_argument("pipeline: duplicate node '" + n.id + "'");

    // build in dependency waves; nodes of one wave run concurrently
    std::map<std::string, BlockReport> built;
    std::vector<const PipelineNode*> pending;
    for (const auto& n : g.nodes) {
        if (n.trusted) {
            BlockReport r;
            r.block = n.id;
            r.notes.push_back("trusted: " + n.citation);
            if (n.declared) r.boundary = *n.declared;
            built.emplace(n.id, std::move(r));
        } else {
            pending.push_back(&n);
        }
    }
    while (!pending.empty()) {
        std::vector<const PipelineNode*> wave, rest;
        for (const auto* n : pending) {
            std::vector<std::string> deps;
            collect_refs(n->params, deps);
            for (const auto& d : deps)
                if (!by_id.count(d)) throw std::invalid_argument("pipeline: node '" + n->id + "' references unknown node '" + d + "'");
            const bool ready = std::all_of(deps.begin(), deps.end(), [&](const std::string& d) { return built.count(d) > 0; });
            (ready ? wave : rest).push_back(n);
        }
        if (wave.empty()) throw std::invalid_argument("pipeline: cyclic parameter references");
        std::vector<std::future<BlockReport>> jobs;
        for (const auto* n : wave) {
            json params = resolve_params(n->params, built);
            jobs.push_back(std::async(std::launch::async, [n, params, grid] {
                BlockReport r = run_block(n->block, params, grid);
                r.block = n->block;
                return r;
            }));
        }
        for (std::size_t i = 0; i < wave.size(); ++i) built.emplace(wave[i]->id, jobs[i].get());
        pending = std::move(rest);
    }

    PipelineReport out;
    out.name = g.name;
    for (const auto& n : g.nodes)
        if (!n.trusted) out.blocks.push_back(built.at(n.id));

    for (const auto& e : g.edges) {
        const auto [n1, f1] = split_ref(e.from);
        const auto [n2, f2] = split_ref(e.to);
        if (!by_id.count(n1) || !by_id.count(n2))
            throw std::invalid_argument("pipeline: edge " + e.from + " -> " + e.to + " names an unknown node");
        PipelineEdge edge = e;
        if (!edge.rescale_ref.empty()) edge.rescale = *resolve_ref(json(edge.rescale_ref), built);
        GluingVerdict v;
        if (edge.kind == "assumed") {
            v.kind = "assumed";
            v.notes.push_back(edge.citation);
        } else {
            const BoundaryProfile& b1 = built.at(n1).boundary;
            const BoundaryProfile& b2 = built.at(n2).boundary;
            if (edge.kind == "perelman")
                v = check_perelman(b1, f1, b2, f2, edge.rescale);
            else if (edge.kind == "corner")
                v = check_corner_gluing(b1, f1, b2, f2, edge.rescale);
            else
                v = check_smooth_match(face_or_throw(b1, f1), face_or_throw(rescaled(b2, edge.rescale), f2));
        }
        out.edges.emplace_back(std::move(edge), std::move(v));
    }
    return out;
}

}  // namespace rb
