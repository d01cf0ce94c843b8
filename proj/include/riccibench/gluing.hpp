#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "riccibench/report.hpp"

namespace rb {

class DescriptorMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct GluingVerdict {
    std::string kind;  // perelman | corner | smooth-match | assumed
    std::vector<Margin> margins;
    std::vector<std::string> flags;  // e.g. "warped, concave"
    std::vector<std::string> notes;

    bool passed() const;
    const Margin* margin(const std::string& label) const;
};

json to_json(const GluingVerdict& v);

inline constexpr double kIsometryTol = 1e-9;
inline constexpr double kCornerBand = 0.05;

// metric lengths scale by R, principal curvatures by 1/R; an arclength parameter scales with the metric
FaceProfile rescaled(const FaceProfile& f, double R);
BoundaryProfile rescaled(const BoundaryProfile& b, double R);

// isometry within tol after rescaling f2, and family-wise II sum >= -ii_tol
GluingVerdict check_perelman(const FaceProfile& f1, const FaceProfile& f2, double rescale = 1.0,
                             double tol = kIsometryTol, double ii_tol = 0.0);
GluingVerdict check_perelman(const BoundaryProfile& b1, const std::string& face1, const BoundaryProfile& b2,
                             const std::string& face2, double rescale = 1.0, double tol = kIsometryTol,
                             double ii_tol = 0.0);

// shared face glued along corners: II sum > tol, angle sums < pi - tol, adjacent faces convex near the corner
GluingVerdict check_corner_gluing(const BoundaryProfile& b1, const std::string& face1, const BoundaryProfile& b2,
                                  const std::string& face2, double rescale = 1.0, double tol = kIsometryTol);

// both ends flat (every derivative below tol) with equal values
GluingVerdict check_smooth_match(const FaceProfile& f1, const FaceProfile& f2, double tol = 1e-8);

// concavity of the "warp" descriptor in arclength (second differences)
bool warped_concave(const FaceProfile& f);

// ---- pipelines ------------------------------------------------------------------

struct PipelineNode {
    std::string id;
    std::string block;  // registry name; empty for trusted nodes
    json params = json::object();
    bool trusted = false;
    std::string citation;
    std::optional<BoundaryProfile> declared;  // declared boundary of a trusted node
};

struct PipelineEdge {
    std::string from;  // node.face
    std::string to;
    std::string kind;  // perelman | corner | smooth-match | assumed
    double rescale = 1.0;
    std::string rescale_ref;  // "@node.aux.key" or "1/@node.aux.key", resolved at assembly
    std::string citation;
};

struct PipelineGraph {
    std::string name;
    std::vector<PipelineNode> nodes;
    std::vector<PipelineEdge> edges;
};

PipelineGraph pipeline_from_json(const json& j);
json to_json(const PipelineGraph& g);

struct PipelineReport {
    std::string name;
    std::vector<BlockReport> blocks;
    std::vector<std::pair<PipelineEdge, GluingVerdict>> edges;
    bool passed() const;
};

json to_json(const PipelineReport& r);

// block params may hold "@node.aux.key" references to aux values of other nodes
PipelineReport assemble_pipeline(const PipelineGraph& g, int grid = 2048);

}  // namespace rb
