#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "riccibench/report.hpp"

namespace rb {

inline constexpr double kInteriorOffset = 1e-6;  // fraction of the interval length
inline constexpr double kRefineFloor = 1e-6;     // smallest refine half-width, fraction of the interval length
inline constexpr int kScanGrid = 512;

// One searched parameter. Names may be dotted ("handle1.lambda1") to reach nested records.
struct ParamAxis {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
    bool lo_open = false;
    bool hi_open = false;
    int resolution = 5;

    double lo_eff() const;  // lo moved inside by the interior offset when open
    double hi_eff() const;
    std::vector<double> samples() const;
};

// name = scale * from + offset, applied after the axes
struct ParamLink {
    std::string name;
    std::string from;
    double scale = 1.0;
    double offset = 0.0;
};

struct ParamBox {
    std::vector<ParamAxis> axes;  // kept sorted by name
    std::vector<ParamLink> links;
    json fixed = json::object();

    std::size_t grid_size() const;  // product of resolutions
    json record(const std::map<std::string, double>& point) const;  // full builder parameter record
};

ParamBox box_from_json(const json& j);
json to_json(const ParamBox& b);

// a block builder and the margins that must be positive (empty: all of them)
struct Predicate {
    std::string block;
    std::vector<std::string> margins;
};

struct Sample {
    std::map<std::string, double> point;  // axis values
    json params;                          // record passed to the builder
    bool passed = false;
    double score = -std::numeric_limits<double>::infinity();  // min over the predicate margins
    std::string worst;                                        // label of that minimum, or the builder error
};

struct Certificate {
    Predicate predicate;
    ParamBox box;
    int grid = kScanGrid;
    std::uint64_t seed = 0;
    std::string sampling;  // grid | random
    std::size_t evaluated = 0;
    std::vector<Sample> passes;       // min margin descending, ties by parameter values
    std::vector<double> iterations;   // best score after each refine step
    bool empty() const { return passes.empty(); }
    const Sample* best() const { return passes.empty() ? nullptr : &passes.front(); }
};

json to_json(const Sample& s);
json to_json(const Certificate& c);

Sample evaluate(const Predicate& pred, const ParamBox& box, const std::map<std::string, double>& point, int grid);

// full grid when budget covers it, otherwise budget seeded uniform samples
Certificate scan(const ParamBox& box, const Predicate& pred, std::size_t budget, std::uint64_t seed = 0,
                 int grid = kScanGrid);

class TargetUnreachable : public std::runtime_error {
public:
    TargetUnreachable(const std::string& what, Certificate last) : std::runtime_error(what), last_(std::move(last)) {}
    const Certificate& last() const { return last_; }

private:
    Certificate last_;
};

// halves a box around the best sample until its score reaches target
Certificate refine(const Certificate& cert, double target_margin);

struct Reverification {
    int grid = 0;
    std::vector<double> scores;
    std::vector<bool> ok;  // still passes and moved by less than half
    bool all_ok() const;
};

Reverification reverify(const Certificate& cert, int grid);
json to_json(const Reverification& r);

}  // namespace rb
