#include "riccibench/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <set>
#include <thread>

#include "riccibench/blocks.hpp"

namespace rb {

// ---- boxes ----------------------------------------------------------------------

double ParamAxis::lo_eff() const { return lo_open ? lo + kInteriorOffset * (hi - lo) : lo; }
double ParamAxis::hi_eff() const { return hi_open ? hi - kInteriorOffset * (hi - lo) : hi; }

std::vector<double> ParamAxis::samples() const {
    const double a = lo_eff(), b = hi_eff();
    if (a == b) return {a};
    if (resolution == 1) return {0.5 * (a + b)};
    return linspace(a, b, resolution);
}

std::size_t ParamBox::grid_size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.samples().size();
    return n;
}

namespace {

void set_path(json& rec, const std::string& path, double v) {
    json* node = &rec;
    std::size_t start = 0;
    for (std::size_t dot; (dot = path.find('.', start)) != std::string::npos; start = dot + 1) {
        json& child = (*node)[path.substr(start, dot - start)];
        if (child.is_null()) child = json::object();
        if (!child.is_object()) throw std::invalid_argument("box: '" + path + "' crosses a non-object parameter");
        node = &child;
    }
    (*node)[path.substr(start)] = v;
}

void validate_axis(const ParamAxis& a) {
    if (a.name.empty()) throw std::invalid_argument("box: axis without a name");
    if (!(a.lo <= a.hi)) throw std::invalid_argument("box: axis '" + a.name + "' has an empty interval");
    if (a.lo == a.hi && (a.lo_open || a.hi_open))
        throw std::invalid_argument("box: axis '" + a.name + "' is a point with an open end");
    if (a.resolution < 1) throw std::invalid_argument("box: axis '" + a.name + "' needs a positive resolution");
}

template <class F>
void for_keys(const json& j, const std::string& what, const std::set<std::string>& allowed, F&& f) {
    if (!j.is_object()) throw std::invalid_argument(what + " must be an object");
    for (const auto& [k, v] : j.items()) {
        if (!allowed.count(k)) throw std::invalid_argument(what + ": unknown key '" + k + "'");
        f(k, v);
    }
}

}  // namespace

json ParamBox::record(const std::map<std::string, double>& point) const {
    json rec = fixed;
    for (const auto& [name, v] : point) set_path(rec, name, v);
    for (const auto& l : links) {
        auto it = point.find(l.from);
        if (it == point.end()) throw std::invalid_argument("box: link '" + l.name + "' refers to unknown axis '" + l.from + "'");
        set_path(rec, l.name, l.scale * it->second + l.offset);
    }
    return rec;
}

ParamBox box_from_json(const json& j) {
    ParamBox b;
    for_keys(j, "box", {"axes", "links", "fixed"}, [&](const std::string& k, const json& v) {
        if (k != "fixed") return;
        if (!v.is_object()) throw std::invalid_argument("box: fixed must be an object");
        b.fixed = v;
    });
    if (j.contains("axes")) {
        if (!j.at("axes").is_object()) throw std::invalid_argument("box.axes must be an object");
        for (const auto& [name, spec] : j.at("axes").items()) {
            ParamAxis a;
            a.name = name;
            for_keys(spec, "box.axes." + name, {"lo", "hi", "open", "resolution"}, [&](const std::string& k, const json& v) {
                if (k == "lo") a.lo = v.get<double>();
                if (k == "hi") a.hi = v.get<double>();
                if (k == "resolution") a.resolution = v.get<int>();
                if (k == "open") {
                    const std::string o = v.get<std::string>();
                    if (o != "lo" && o != "hi" && o != "both" && o != "none")
                        throw std::invalid_argument("box.axes." + name + ".open must be lo, hi, both or none");
                    a.lo_open = o == "lo" || o == "both";
                    a.hi_open = o == "hi" || o == "both";
                }
            });
            if (!spec.contains("lo") || !spec.contains("hi"))
                throw std::invalid_argument("box.axes." + name + " needs lo and hi");
            validate_axis(a);
            b.axes.push_back(a);
        }
    }
    if (j.contains("links")) {
        if (!j.at("links").is_object()) throw std::invalid_argument("box.links must be an object");
        for (const auto& [name, spec] : j.at("links").items()) {
            ParamLink l;
            l.name = name;
            for_keys(spec, "box.links." + name, {"from", "scale", "offset"}, [&](const std::string& k, const json& v) {
                if (k == "from") l.from = v.get<std::string>();
                if (k == "scale") l.scale = v.get<double>();
                if (k == "offset") l.offset = v.get<double>();
            });
            b.links.push_back(l);
        }
    }
    std::sort(b.axes.begin(), b.axes.end(), [](const ParamAxis& x, const ParamAxis& y) { return x.name < y.name; });
    for (std::size_t i = 1; i < b.axes.size(); ++i)
        if (b.axes[i].name == b.axes[i - 1].name) throw std::invalid_argument("box: duplicate axis '" + b.axes[i].name + "'");
    for (const auto& l : b.links)
        if (std::none_of(b.axes.begin(), b.axes.end(), [&](const ParamAxis& a) { return a.name == l.from; }))
            throw std::invalid_argument("box: link '" + l.name + "' refers to unknown axis '" + l.from + "'");
    return b;
}

json to_json(const ParamBox& b) {
    json axes = json::object();
    for (const auto& a : b.axes) {
        const char* open = a.lo_open && a.hi_open ? "both" : a.lo_open ? "lo" : a.hi_open ? "hi" : "none";
        axes[a.name] = {{"lo", a.lo}, {"hi", a.hi}, {"open", open}, {"resolution", a.resolution}};
    }
    json links = json::object();
    for (const auto& l : b.links) links[l.name] = {{"from", l.from}, {"scale", l.scale}, {"offset", l.offset}};
    return {{"axes", axes}, {"links", links}, {"fixed", b.fixed}};
}

// ---- evaluation -------------------------------------------------------------------

Sample evaluate(const Predicate& pred, const ParamBox& box, const std::map<std::string, double>& point, int grid) {
    Sample s;
    s.point = point;
    s.params = box.record(point);
    BlockReport r;
    try {
        r = run_block(pred.block, s.params, grid);
    } catch (const ParamError&) {
        throw;
    } catch (const std::exception& e) {
        s.worst = std::string("error: ") + e.what();
        return s;
    }
    auto consider = [&](const Margin& m) {
        if (s.worst.empty() || m.min < s.score) {
            s.score = m.min;
            s.worst = m.label;
        }
    };
    if (pred.margins.empty()) {
        for (const Margin& m : r.margins) consider(m);
    } else {
        for (const auto& label : pred.margins) {
            const Margin* m = r.margin(label);
            if (!m) throw ParamError("predicate: block '" + pred.block + "' has no margin '" + label + "'");
            consider(*m);
        }
    }
    s.passed = !s.worst.empty() && s.score > 0.0;
    return s;
}

namespace {

std::vector<double> values_of(const std::map<std::string, double>& p) {
    std::vector<double> v;
    for (const auto& [k, x] : p) v.push_back(x);
    return v;
}

// higher score first, then parameter values in name order
bool ranks_before(const Sample& a, const Sample& b) {
    if (a.score != b.score) return a.score > b.score;
    return values_of(a.point) < values_of(b.point);
}

std::vector<Sample> evaluate_all(const Predicate& pred, const ParamBox& box,
                                 const std::vector<std::map<std::string, double>>& points, int grid) {
    std::vector<Sample> out(points.size());
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), points.size()));
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w)
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < points.size(); i += workers) out[i] = evaluate(pred, box, points[i], grid);
        }));
    for (auto& j : jobs) j.get();
    return out;
}

void rank(std::vector<Sample>& passes) { std::stable_sort(passes.begin(), passes.end(), ranks_before); }

}  // namespace

Certificate scan(const ParamBox& box, const Predicate& pred, std::size_t budget, std::uint64_t seed, int grid) {
    Certificate c;
    c.predicate = pred;
    c.box = box;
    c.grid = grid;
    c.seed = seed;
    std::vector<std::map<std::string, double>> points;
    const std::size_t full = box.grid_size();
    if (budget >= full) {
        c.sampling = "grid";
        std::vector<std::vector<double>> axis_samples;
        for (const auto& a : box.axes) axis_samples.push_back(a.samples());
        std::vector<std::size_t> idx(box.axes.size(), 0);
        for (std::size_t n = 0; n < full; ++n) {
            std::map<std::string, double> p;
            for (std::size_t k = 0; k < box.axes.size(); ++k) p[box.axes[k].name] = axis_samples[k][idx[k]];
            points.push_back(std::move(p));
            for (std::size_t k = box.axes.size(); k-- > 0;) {
                if (++idx[k] < axis_samples[k].size()) break;
                idx[k] = 0;
            }
        }
    } else {
        c.sampling = "random";
        std::mt19937_64 rng(seed);
        for (std::size_t n = 0; n < budget; ++n) {
            std::map<std::string, double> p;
            for (const auto& a : box.axes)
                p[a.name] = std::uniform_real_distribution<double>(a.lo_eff(), a.hi_eff())(rng);
            points.push_back(std::move(p));
        }
    }
    c.evaluated = points.size();
    for (auto& s : evaluate_all(pred, box, points, grid))
        if (s.passed) c.passes.push_back(std::move(s));
    rank(c.passes);
    return c;
}

Certificate refine(const Certificate& cert, double target_margin) {
    if (cert.empty()) throw std::invalid_argument("refine: empty certificate");
    Certificate out = cert;
    Sample best = *cert.best();
    if (best.score >= target_margin) return out;

    const ParamBox& box = cert.box;
    std::vector<double> half, floor;
    for (const auto& a : box.axes) {
        half.push_back(0.5 * (a.hi_eff() - a.lo_eff()));
        floor.push_back(kRefineFloor * (a.hi - a.lo));
    }
    std::set<std::vector<double>> seen;
    for (const auto& s : out.passes) seen.insert(values_of(s.point));
    while (true) {
        bool above_floor = false;
        for (std::size_t k = 0; k < half.size(); ++k) {
            half[k] *= 0.5;
            above_floor = above_floor || half[k] >= floor[k];
        }
        if (!above_floor) {
            throw TargetUnreachable("refine: target margin " + std::to_string(target_margin) +
                                        " unreachable at the granularity floor; best " + std::to_string(best.score),
                                    out);
        }
        // the 3^k stencil around the best point, clipped to the box
        std::vector<std::map<std::string, double>> points;
        const std::size_t k = box.axes.size();
        std::size_t total = 1;
        for (std::size_t i = 0; i < k; ++i) total *= 3;
        for (std::size_t n = 0; n < total; ++n) {
            std::map<std::string, double> p;
            for (std::size_t i = 0, m = n; i < k; ++i, m /= 3) {
                const ParamAxis& a = box.axes[i];
                const double step = static_cast<double>(static_cast<int>(m % 3) - 1) * half[i];
                p[a.name] = std::clamp(best.point.at(a.name) + step, a.lo_eff(), a.hi_eff());
            }
            if (seen.insert(values_of(p)).second) points.push_back(std::move(p));
        }
        out.evaluated += points.size();
        for (auto& s : evaluate_all(out.predicate, box, points, out.grid)) {
            if (!s.passed) continue;
            if (ranks_before(s, best)) best = s;
            out.passes.push_back(std::move(s));
        }
        rank(out.passes);
        out.iterations.push_back(best.score);
        if (best.score >= target_margin) return out;
    }
}

bool Reverification::all_ok() const {
    return std::all_of(ok.begin(), ok.end(), [](bool b) { return b; });
}

Reverification reverify(const Certificate& cert, int grid) {
    Reverification r;
    r.grid = grid;
    std::vector<std::map<std::string, double>> points;
    for (const auto& s : cert.passes) points.push_back(s.point);
    const auto again = evaluate_all(cert.predicate, cert.box, points, grid);
    for (std::size_t i = 0; i < again.size(); ++i) {
        const double s0 = cert.passes[i].score, s1 = again[i].score;
        r.scores.push_back(s1);
        r.ok.push_back(again[i].passed && std::abs(s1 - s0) < 0.5 * std::abs(s0));
    }
    return r;
}

json to_json(const Reverification& r) {
    return {{"grid", r.grid}, {"scores", r.scores}, {"ok", r.ok}, {"all_ok", r.all_ok()}};
}

json to_json(const Sample& s) {
    json point = json::object();
    for (const auto& [k, v] : s.point) point[k] = v;
    return {{"point", point}, {"params", s.params}, {"passed", s.passed}, {"min_margin", s.score}, {"worst", s.worst}};
}

json to_json(const Certificate& c) {
    json passes = json::array();
    for (const auto& s : c.passes) passes.push_back(to_json(s));
    return {{"predicate", {{"block", c.predicate.block}, {"margins", c.predicate.margins}}},
            {"box", to_json(c.box)},
            {"grid", c.grid},
            {"seed", c.seed},
            {"sampling", c.sampling},
            {"evaluated", c.evaluated},
            {"passes", passes},
            {"best", c.best() ? to_json(*c.best()) : json(nullptr)},
            {"iterations", c.iterations}};
}

}  // namespace rb
