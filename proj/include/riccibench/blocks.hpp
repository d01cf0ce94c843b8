#pragma once

#include <optional>
#include <string>
#include <vector>

#include "riccibench/curvature.hpp"
#include "riccibench/funcspace.hpp"
#include "riccibench/report.hpp"

namespace rb {

inline constexpr int kDefaultGrid = 2048;
// samples closer than this fraction of a flattening window to a flat point are skipped:
// every derivative there is below the smallest representable double
inline constexpr double kFlatEndGuard = 1e-3;

// A builder could not produce its metric (infeasible input geometry).
class BlockError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A parameter record names an unknown block or key, or has the wrong type.
class ParamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---- cone metric ------------------------------------------------------------

struct ConeParams {
    int n = 4;
    double K = 0.9;
    double eps1 = 0.1;
    double eps2 = 0.1;
    double delta = 0.02;  // half-width of each junction window
    double t = 0.5;
};

struct ConeResult {
    SmoothCurve f;
    SmoothCurve chi;  // f = sin(chi)
    BlockReport report;
};

ConeResult build_cone_metric(const ConeParams& p, int grid = kDefaultGrid);

// ---- handle with a corner of angle < pi/2 -----------------------------------

struct Handle1Params {
    int n = 4;
    double K = 0.9;
    double lambda1 = 0.98;
    double lambda2 = 0.99;
    double eps1 = 0.01;
    double eps2 = 0.1;
    double delta = 0.05;
};

struct Handle1Result {
    BlockReport report;
    FHCurve f;
    SmoothCurve alpha;   // smoothed graph height on [a, pi/2]
    SmoothCurve beta;    // height drop on [pi/2, pi/2 + eps2]
    SmoothCurve B;       // outer face warp in arclength from the corner
    double f_end = 0.0;  // f at the outer constant height
    double theta = 0.0;
};

Handle1Result build_handle1(const Handle1Params& p, int grid = kDefaultGrid);

// angle at the corner with f replaced by 1 + lambda1 t
double corner_angle_handle1(double lambda1, double eps1);

// ---- collar handle ------------------------------------------------------------

struct Handle2Params {
    int n = 4;
    double lambda1 = 0.005;
    double lambda2 = 0.01;
    double a = 0.02;
    double b = 2.0;
    double eps = 0.1;
    double nu = 0.01;
    std::optional<double> t0;  // default b + 2
    double flatten_width = 1.0;
    double fH_delta = 0.05;
};

struct Handle2Result {
    BlockReport report;
    SmoothCurve f;       // flattened at t0
    SmoothCurve beta;    // beta(0) = 0, beta' = a (t/b - 1) chi(t - b)
    SmoothCurve B_ext;   // cubic extension on [-delta', 0]
    double theta = 0.0;
};

// B: boundary warp with B(0) the boundary, s = distance to it; B'(0) < 0, B''(0) < 0
Handle2Result build_handle2(const SmoothCurve& B, const Handle2Params& p, int grid = kDefaultGrid);

// -a^2 l2 (1 + l2 b) - 2 l2 / (1 + l1 alpha) + 1/(b - alpha)
double handle2_closed_form_margin(double lambda1, double lambda2, double a, double b, double alpha);

// arccos(-a / sqrt(1 + a^2))
double handle2_corner_angle(double a);

struct HandleAssembly {
    BlockReport report;
    Handle1Result h1;
    Handle2Result h2;
};

HandleAssembly assemble_handle(const Handle1Params& p1, Handle2Params p2, int grid = kDefaultGrid);

// assembled handle times a round fibre sphere of radius r (trivial bundle over the handle),
// scaled so that the inner face carries the unit base metric
struct HandleBundleParams {
    Handle1Params handle1;
    Handle2Params handle2;
    int fibre_dim = 2;
    double r = 0.01;
};

BlockReport build_handle_bundle(const HandleBundleParams& p, int grid = kDefaultGrid);

// ---- transfer block -----------------------------------------------------------

struct TransferParams {
    int p = 2;  // fibre dimension
    int q = 3;  // base dimension
    double r0 = 0.1;
    double nu = 2.0;
    double lambda = 0.5;
    double a = 0.2;
    double C = 0.5;  // Ric(dt,dt) > 0 needs C < p/q
    ATensorBounds a_bounds;
    double ricci_base_lb = 1.0;   // units of (q-1)
    double ricci_fibre_lb = 1.0;  // units of (p-1)
    double t_max = 100.0;
    int step_budget = kDefaultStepBudget;
    // "log": integrate and sample uniformly in log(1 + t), for lambda close to 1 where t0 is huge
    std::string time_axis = "t";
};

BlockReport build_transfer_block(const TransferParams& p, int grid = kDefaultGrid);

// ---- trivial circle bundle ------------------------------------------------------

struct S1Params {
    int q = 3;
    double lambda = 0.5;
    std::optional<double> ric_base_lb;  // absolute; default q-1
};

BlockReport build_s1_block(const S1Params& p, int grid = kDefaultGrid);

// ---- fibre disc -----------------------------------------------------------------

struct FibreDiscParams {
    int p = 3;
    double t0 = M_PI / 2;
    // collar face of dt^2 + R^2 g' + r^2 h(t/r)^2 ds^2 over a q-dimensional base
    int q = 3;
    double r = 0.01;
    double R = 1.0;
};

struct FibreDiscResult {
    SmoothCurve h;
    BlockReport report;
};

FibreDiscResult build_fibre_disc_warp(const FibreDiscParams& p, int grid = kDefaultGrid);

// ---- doubly warped sphere -----------------------------------------------------

BlockReport build_sphere_transition(const SmoothCurve& A, const SmoothCurve& B, int p, int q, int grid = kDefaultGrid);

// ---- cohomogeneity one families --------------------------------------------------

struct ProjectiveParams {
    int d = 2;
    int n = 2;
    double s = 0.5;
    double width = 0.05;  // flattening window below (1-s)/(1+s)
};

BlockReport projective_family_check(const ProjectiveParams& p, int grid = kDefaultGrid);

inline constexpr double kWuEpsPrime = 0.8;

struct WuParams {
    std::string variant = "g00";  // g00 | blended
    double eps = 0.05;
    std::optional<double> eps_prime;  // default kWuEpsPrime
};

BlockReport wu_family_check(const WuParams& p, int grid = kDefaultGrid);

double boundary_conformal_margin(double c, double C);

// ---- registry used by the feasibility engine and the CLI ---------------------

// builds the named block from a JSON parameter record; unknown keys are rejected
BlockReport run_block(const std::string& name, const json& params, int grid = kDefaultGrid);
std::vector<std::string> block_names();

}  // namespace rb
