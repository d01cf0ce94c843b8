#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "riccibench/curve.hpp"

namespace rb {

using json = nlohmann::ordered_json;

// A named inequality "quantity > 0" with its worst sample.
struct Margin {
    std::string label;
    double min = std::numeric_limits<double>::infinity();
    double argmin = std::numeric_limits<double>::quiet_NaN();

    void update(double value, double at);
    bool passes() const { return min > 0.0; }
};

// margin of fn over the sample points; a NaN value counts as -inf (a failure)
Margin scan_margin(const std::string& label, const std::vector<double>& ts, const std::function<double(double)>& fn);

// nonstrict "x >= 0" turned into a strict margin
inline constexpr double kNonstrictSlack = 1e-9;

// Sampled quantities along one parameter, exported as CSV.
struct Sweep {
    std::string name;
    std::string axis = "t";
    std::vector<double> axis_values;
    std::map<std::string, std::vector<double>> columns;  // sorted labels
};

// CSV: axis column, then the sorted columns
void write_sweep_csv(std::ostream& os, const Sweep& s);

// ---- boundary data ---------------------------------------------------------

enum class FaceKind { warped_sphere, warped_double_sphere, bundle_over_base };
std::string to_string(FaceKind k);
FaceKind face_kind_from_string(const std::string& s);

// One boundary face. Metric and II data share the param grid; a length-1 vector is a constant.
struct FaceProfile {
    std::string id;
    int dimension = 0;
    FaceKind kind = FaceKind::warped_sphere;
    std::vector<double> param;
    std::map<std::string, std::vector<double>> metric;  // warp curves / constant factors
    std::map<std::string, std::vector<double>> ii;      // principal curvatures by direction family
    std::map<std::string, std::string> corner_end;      // corner id -> "lo" | "hi"
    std::map<std::string, Jet> end_jets;                // jets of warps at a matching end
    std::string match_end;                              // "lo" | "hi" for smooth matching
};

struct Corner {
    std::string id;
    std::vector<double> angle;  // radians, constant when size 1
    std::vector<std::string> faces;
};

struct BoundaryProfile {
    std::vector<FaceProfile> faces;
    std::vector<Corner> corners;

    const FaceProfile* face(const std::string& id) const;
    const Corner* corner(const std::string& id) const;
};

json to_json(const FaceProfile& f);
json to_json(const Corner& c);
json to_json(const BoundaryProfile& b);
FaceProfile face_from_json(const json& j);
BoundaryProfile boundary_from_json(const json& j);

// ---- block report ----------------------------------------------------------

struct BlockReport {
    std::string block;
    json params = json::object();
    std::vector<Margin> margins;
    BoundaryProfile boundary;
    std::map<std::string, double> aux;  // theta, t0, r1, R, ...
    std::vector<Sweep> sweeps;
    std::vector<std::string> notes;

    bool passed() const;
    std::optional<std::string> first_failure() const;
    double min_margin() const;  // smallest margin min (inf when empty)
    const Margin* margin(const std::string& label) const;
    void add(Margin m) { margins.push_back(std::move(m)); }
};

json to_json(const Margin& m);
json to_json(const BlockReport& r);

}  // namespace rb
