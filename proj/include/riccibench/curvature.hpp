#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "riccibench/curve.hpp"
#include "riccibench/report.hpp"

namespace rb {

// dt^2 + f(t)^2 ds_p^2 + h(t)^2 ds_q^2
struct DoublyWarpedMetric {
    int p = 1;
    int q = 1;
    SmoothCurve f;
    SmoothCurve h;
    std::vector<double> collapse_points;  // endpoints where f or h is allowed to vanish
};

// dt^2 + f^2 (base, dim q) + h^2 (fibre, dim p) with A-tensor sup bounds
struct ATensorBounds {
    double sup_AX2 = 0.0;
    double sup_AV2 = 0.0;
    double sup_deltaA = 0.0;
};

struct BundleWarpedMetric {
    int p = 2;  // fibre dimension
    int q = 2;  // base dimension
    SmoothCurve f;
    SmoothCurve h;
    double ricci_base_lb = 1.0;   // Ric_base >= lb (q-1)
    double ricci_fibre_lb = 1.0;  // Ric_fibre >= lb (p-1)
    ATensorBounds a;
};

enum class CohomFamily { projective, wu };

// dt^2 + f^2 L|p + h^2 L|m on [-1, 1]
struct CohomOneMetric {
    int d = 2;
    int n = 2;
    SmoothCurve f;
    SmoothCurve h;
};

class CurvaturePoint {
public:
    double t = 0.0;
    std::vector<std::pair<std::string, double>> entries;

    void set(const std::string& label, double v);
    double at(const std::string& label) const;  // throws std::out_of_range
    std::optional<double> find(const std::string& label) const;
};

struct IIProfile {
    std::vector<std::pair<std::string, double>> eigen;  // direction family -> eigenvalue
    std::string normal = "outward";
    double at(const std::string& family) const;
};

class UndeclaredCollapse : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// sectional values sec(dt,u) sec(dt,v) sec(u,v) sec(u,u') sec(v,v') and Ric(dt,dt) Ric(u,u) Ric(v,v)
CurvaturePoint doubly_warped_curvature(const DoublyWarpedMetric& m, double t);

// sec > 0 characterization on the collapsed sphere: f'' < 0 on (0,t0], h'' < 0 on [0,t0), f'''(0) < 0, h'''(t0) < 0,
// the last one in the parameter t0 - t that closes h up
std::vector<Margin> sphere_positivity_margins(const DoublyWarpedMetric& m, int n = 2048);

// CSV: t, then the entries by sorted label
void write_curvature_sweep(std::ostream& os, const std::vector<CurvaturePoint>& points);

// principal curvatures of the slice {t} with respect to dt: f'/f (p-sphere), h'/h (q-sphere)
IIProfile slice_II(const DoublyWarpedMetric& m, double t);

// metric R^2 g in the rescaled coordinate R t
DoublyWarpedMetric scale_metric(const DoublyWarpedMetric& m, double R);

enum class Orientation { up, down };

// graph {t = alpha(s)} in dt^2 + f(t)^2 (ds^2 + R(s)^2 ds_{n-1}^2); entries radial, mixed, sphere
IIProfile graph_II(const SmoothCurve& f, const SmoothCurve& R, const SmoothCurve& alpha, double s,
                   Orientation orientation = Orientation::up);

// Ric(dt,dt), lower bounds Ric(X,X)_lb, Ric(V,V)_lb, upper bound |Ric(X,V)|_ub (unit X/f, V/h)
CurvaturePoint bundle_warped_ricci(const BundleWarpedMetric& m, double t);

struct ShrinkBounds {
    CurvaturePoint bounds;          // Ric(U,U)_lb, Ric(X,X)_lb, |Ric(U,X)|_ub
    std::optional<double> r_star;  // +inf when every r works
};

ShrinkBounds submersion_shrink_bounds(double ric_base_lb, double ric_fibre_lb, const ATensorBounds& a, double r);

// Ric(dt,dt), Ric(V,V), Ric(X,X) of the cohomogeneity-one ansatz; t = +-1 by series limits
CurvaturePoint cohomog1_ricci(const CohomOneMetric& m, double t, CohomFamily family);

// ---- finite-difference oracle ---------------------------------------------

using MetricChart = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct FdOptions {
    double step = 1e-4;
};

// Ricci tensor from central differences of g through Christoffel symbols, O(step^2).
Eigen::MatrixXd fd_ricci(const MetricChart& g, const Eigen::VectorXd& x, const FdOptions& opt = {});

// eigenvalues of g^{-1} Ric at x
Eigen::VectorXd ricci_eigenvalues(const MetricChart& g, const Eigen::VectorXd& x, const FdOptions& opt = {});

// coordinates (t, theta_1..theta_p, phi_1..phi_q); hyperspherical angles on each sphere
MetricChart doubly_warped_chart(const DoublyWarpedMetric& m);

class ChartBoundary : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// the built-in chart with a stencil check against the coordinate box
Eigen::MatrixXd fd_curvature_oracle(const DoublyWarpedMetric& m, const Eigen::VectorXd& x, const FdOptions& opt = {});

}  // namespace rb
