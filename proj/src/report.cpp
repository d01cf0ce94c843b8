#include "riccibench/report.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace rb {

void Margin::update(double value, double at) {
    if (std::isnan(value)) value = -std::numeric_limits<double>::infinity();
    if (value < min || std::isnan(argmin)) {
        min = std::min(min, value);
        argmin = at;
    }
}

Margin scan_margin(const std::string& label, const std::vector<double>& ts, const std::function<double(double)>& fn) {
    Margin m{label};
    for (double t : ts) m.update(fn(t), t);
    return m;
}

void write_sweep_csv(std::ostream& os, const Sweep& s) {
    const auto prec = os.precision(17);
    os << s.axis;
    for (const auto& [label, col] : s.columns) {
        if (col.size() != s.axis_values.size()) throw std::invalid_argument("sweep column length mismatch: " + label);
        os << ',' << label;
    }
    os << '\n';
    for (std::size_t i = 0; i < s.axis_values.size(); ++i) {
        os << s.axis_values[i];
        for (const auto& kv : s.columns) os << ',' << kv.second[i];
        os << '\n';
    }
    os.precision(prec);
}

std::string to_string(FaceKind k) {
    switch (k) {
        case FaceKind::warped_sphere: return "warped-sphere";
        case FaceKind::warped_double_sphere: return "warped-double-sphere";
        case FaceKind::bundle_over_base: return "bundle-over-base";
    }
    return "unknown";
}

FaceKind face_kind_from_string(const std::string& s) {
    if (s == "warped-sphere") return FaceKind::warped_sphere;
    if (s == "warped-double-sphere") return FaceKind::warped_double_sphere;
    if (s == "bundle-over-base") return FaceKind::bundle_over_base;
    throw std::invalid_argument("unknown face kind: " + s);
}

const FaceProfile* BoundaryProfile::face(const std::string& id) const {
    for (const auto& f : faces)
        if (f.id == id) return &f;
    return nullptr;
}

const Corner* BoundaryProfile::corner(const std::string& id) const {
    for (const auto& c : corners)
        if (c.id == id) return &c;
    return nullptr;
}

static json finite_or_null(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

static json array_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(finite_or_null(x));
    return a;
}

static std::vector<double> array_from(const json& j) {
    std::vector<double> v;
    for (const auto& x : j) v.push_back(x.is_null() ? std::numeric_limits<double>::quiet_NaN() : x.get<double>());
    return v;
}

json to_json(const FaceProfile& f) {
    json j;
    j["id"] = f.id;
    j["dimension"] = f.dimension;
    j["kind"] = to_string(f.kind);
    j["param"] = array_json(f.param);
    j["metric"] = json::object();
    for (const auto& [k, v] : f.metric) j["metric"][k] = array_json(v);
    j["ii"] = json::object();
    for (const auto& [k, v] : f.ii) j["ii"][k] = array_json(v);
    j["corner_end"] = f.corner_end;
    j["end_jets"] = json::object();
    for (const auto& [k, v] : f.end_jets) j["end_jets"][k] = array_json({v[0], v[1], v[2], v[3]});
    if (!f.match_end.empty()) j["match_end"] = f.match_end;
    return j;
}

json to_json(const Corner& c) {
    return json{{"id", c.id}, {"angle", array_json(c.angle)}, {"faces", c.faces}};
}

json to_json(const BoundaryProfile& b) {
    json j;
    j["faces"] = json::array();
    for (const auto& f : b.faces) j["faces"].push_back(to_json(f));
    j["corners"] = json::array();
    for (const auto& c : b.corners) j["corners"].push_back(to_json(c));
    return j;
}

FaceProfile face_from_json(const json& j) {
    FaceProfile f;
    f.id = j.at("id").get<std::string>();
    f.dimension = j.at("dimension").get<int>();
    f.kind = face_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("param")) f.param = array_from(j["param"]);
    if (j.contains("metric"))
        for (const auto& [k, v] : j["metric"].items()) f.metric[k] = array_from(v);
    if (j.contains("ii"))
        for (const auto& [k, v] : j["ii"].items()) f.ii[k] = array_from(v);
    if (j.contains("corner_end"))
        for (const auto& [k, v] : j["corner_end"].items()) f.corner_end[k] = v.get<std::string>();
    if (j.contains("end_jets"))
        for (const auto& [k, v] : j["end_jets"].items()) {
            auto a = array_from(v);
            if (a.size() != 4) throw std::invalid_argument("end_jets entries need four values");
            f.end_jets[k] = Jet{a[0], a[1], a[2], a[3]};
        }
    if (j.contains("match_end")) f.match_end = j["match_end"].get<std::string>();
    return f;
}

BoundaryProfile boundary_from_json(const json& j) {
    BoundaryProfile b;
    for (const auto& f : j.at("faces")) b.faces.push_back(face_from_json(f));
    if (j.contains("corners"))
        for (const auto& c : j["corners"])
            b.corners.push_back(Corner{c.at("id").get<std::string>(), array_from(c.at("angle")),
                                       c.at("faces").get<std::vector<std::string>>()});
    return b;
}

bool BlockReport::passed() const {
    for (const auto& m : margins)
        if (!m.passes()) return false;
    return true;
}

std::optional<std::string> BlockReport::first_failure() const {
    for (const auto& m : margins)
        if (!m.passes()) return m.label;
    return std::nullopt;
}

double BlockReport::min_margin() const {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& m : margins) v = std::min(v, m.min);
    return v;
}

const Margin* BlockReport::margin(const std::string& label) const {
    for (const auto& m : margins)
        if (m.label == label) return &m;
    return nullptr;
}

json to_json(const Margin& m) {
    return json{{"label", m.label}, {"min", finite_or_null(m.min)}, {"argmin", finite_or_null(m.argmin)}};
}

json to_json(const BlockReport& r) {
    json j;
    j["block"] = r.block;
    j["params"] = r.params;
    j["margins"] = json::array();
    for (const auto& m : r.margins) j["margins"].push_back(to_json(m));
    if (auto f = r.first_failure())
        j["verdict"] = "fail(" + *f + ")";
    else
        j["verdict"] = "pass";
    j["min_margin"] = finite_or_null(r.min_margin());
    j["boundary"] = to_json(r.boundary);
    j["aux"] = json::object();
    for (const auto& [k, v] : r.aux) j["aux"][k] = finite_or_null(v);
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

}  // namespace rb
