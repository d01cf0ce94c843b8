#include "riccibench/curvature.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rb {

void CurvaturePoint::set(const std::string& label, double v) {
    for (auto& e : entries)
        if (e.first == label) {
            e.second = v;
            return;
        }
    entries.emplace_back(label, v);
}

double CurvaturePoint::at(const std::string& label) const {
    if (auto v = find(label)) return *v;
    throw std::out_of_range("CurvaturePoint: no entry " + label);
}

std::optional<double> CurvaturePoint::find(const std::string& label) const {
    for (const auto& e : entries)
        if (e.first == label) return e.second;
    return std::nullopt;
}

double IIProfile::at(const std::string& family) const {
    for (const auto& e : eigen)
        if (e.first == family) return e.second;
    throw std::out_of_range("IIProfile: no family " + family);
}

namespace {

constexpr double kZero = 1e-13;

bool declared(const std::vector<double>& pts, double t) {
    for (double c : pts)
        if (std::abs(c - t) <= 1e-12 * std::max(1.0, std::abs(c))) return true;
    return false;
}

// ratios entering every warped-product formula, with series limits where a warp closes up
struct WarpTerms {
    double f2 = 0.0;  // f''/f
    double h2 = 0.0;  // h''/h
    double cross = 0.0;  // f'h'/(fh)
    double fs = 0.0;  // (1 - f'^2)/f^2
    double hs = 0.0;  // (1 - h'^2)/h^2
};

// closing warp x with x(e)=0, |x'(e)|=1, x''(e)=0 and regular partner y with y'(e)=0
void collapse_terms(const Jet& x, const Jet& y, double& x2, double& xs, double& cross, double& y2, double& ys) {
    if (std::abs(std::abs(x[1]) - 1.0) > 1e-6)
        throw UndeclaredCollapse("collapse endpoint needs unit first derivative of the closing warp");
    if (std::abs(y[1]) > 1e-9) throw UndeclaredCollapse("collapse endpoint needs an even partner warp");
    x2 = x[3] / x[1];
    xs = -x[3] / x[1];
    cross = y[2] / y[0];
    y2 = y[2] / y[0];
    ys = (1.0 - y[1] * y[1]) / (y[0] * y[0]);
}

WarpTerms warp_terms(const Jet& F, const Jet& H, double t, const std::vector<double>& collapse) {
    const bool fz = std::abs(F[0]) < kZero, hz = std::abs(H[0]) < kZero;
    WarpTerms w;
    if (!fz && !hz) {
        w.f2 = F[2] / F[0];
        w.h2 = H[2] / H[0];
        w.cross = F[1] * H[1] / (F[0] * H[0]);
        w.fs = (1.0 - F[1] * F[1]) / (F[0] * F[0]);
        w.hs = (1.0 - H[1] * H[1]) / (H[0] * H[0]);
        return w;
    }
    if (!declared(collapse, t)) {
        std::ostringstream msg;
        msg << "warp vanishes at undeclared point t=" << t;
        throw UndeclaredCollapse(msg.str());
    }
    if (fz && hz) throw UndeclaredCollapse("both warps vanish at the same point");
    if (fz)
        collapse_terms(F, H, w.f2, w.fs, w.cross, w.h2, w.hs);
    else
        collapse_terms(H, F, w.h2, w.hs, w.cross, w.f2, w.fs);
    return w;
}

}  // namespace

CurvaturePoint doubly_warped_curvature(const DoublyWarpedMetric& m, double t) {
    const Jet F = m.f.jet(t), H = m.h.jet(t);
    const WarpTerms w = warp_terms(F, H, t, m.collapse_points);
    CurvaturePoint c;
    c.t = t;
    c.set("sec(dt,u)", -w.f2);
    c.set("sec(dt,v)", -w.h2);
    c.set("sec(u,v)", -w.cross);
    c.set("sec(u,u')", w.fs);
    c.set("sec(v,v')", w.hs);
    c.set("Ric(dt,dt)", -m.p * w.f2 - m.q * w.h2);
    c.set("Ric(u,u)", -w.f2 + (m.p - 1) * w.fs - m.q * w.cross);
    c.set("Ric(v,v)", -w.h2 + (m.q - 1) * w.hs - m.p * w.cross);
    return c;
}

std::vector<Margin> sphere_positivity_margins(const DoublyWarpedMetric& m, int n) {
    const double t0 = m.f.hi();
    const auto ts = linspace(m.f.lo(), t0, n);
    std::vector<Margin> out;
    Margin f2{"f_second_negative"}, h2{"h_second_negative"};
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i > 0) f2.update(-m.f.eval(ts[i], 2), ts[i]);
        if (i + 1 < ts.size()) h2.update(-m.h.eval(ts[i], 2), ts[i]);
    }
    out.push_back(f2);
    out.push_back(h2);
    Margin f3{"f_third_negative_at_0"}, h3{"h_third_negative_at_t0"};
    f3.update(-m.f.eval(m.f.lo(), 3), m.f.lo());
    // third derivative in the reversed parameter t0 - t
    h3.update(m.h.eval(t0, 3), t0);
    out.push_back(f3);
    out.push_back(h3);
    return out;
}

void write_curvature_sweep(std::ostream& os, const std::vector<CurvaturePoint>& points) {
    Sweep s;
    for (const auto& p : points) {
        s.axis_values.push_back(p.t);
        for (const auto& [label, v] : p.entries) s.columns[label];
    }
    for (auto& [label, col] : s.columns)
        for (const auto& p : points) col.push_back(p.at(label));
    write_sweep_csv(os, s);
}

IIProfile slice_II(const DoublyWarpedMetric& m, double t) {
    const Jet F = m.f.jet(t), H = m.h.jet(t);
    if (std::abs(F[0]) < kZero || std::abs(H[0]) < kZero)
        throw std::domain_error("slice_II: slice through a collapse point");
    IIProfile ii;
    ii.normal = "dt";
    ii.eigen = {{"p-sphere", F[1] / F[0]}, {"q-sphere", H[1] / H[0]}};
    return ii;
}

DoublyWarpedMetric scale_metric(const DoublyWarpedMetric& m, double R) {
    if (!(R > 0.0)) throw std::invalid_argument("scale_metric: R must be positive");
    DoublyWarpedMetric out = m;
    out.f = R * reparam(m.f, 1.0 / R, 0.0);
    out.h = R * reparam(m.h, 1.0 / R, 0.0);
    for (auto& c : out.collapse_points) c *= R;
    return out;
}

IIProfile graph_II(const SmoothCurve& f, const SmoothCurve& R, const SmoothCurve& alpha, double s,
                   Orientation orientation) {
    const Jet a = alpha.jet(s);
    const Jet F = f.jet(a[0]);
    const Jet B = R.jet(s);
    if (!(F[0] > 0.0) || !(B[0] > 0.0)) throw std::domain_error("graph_II: warps must be positive");
    const double norm = std::sqrt(1.0 + a[1] * a[1] / (F[0] * F[0]));
    const double sign = orientation == Orientation::up ? 1.0 : -1.0;
    IIProfile ii;
    ii.normal = orientation == Orientation::up ? "up" : "down";
    ii.eigen = {{"radial", sign * (F[1] * F[0] + 2.0 * (F[1] / F[0]) * a[1] * a[1] - a[2]) / norm},
                {"mixed", 0.0},
                {"sphere", sign * (F[1] * F[0] - (B[1] / B[0]) * a[1]) / norm}};
    return ii;
}

CurvaturePoint bundle_warped_ricci(const BundleWarpedMetric& m, double t) {
    const Jet F = m.f.jet(t), H = m.h.jet(t);
    if (!(F[0] > 0.0) || !(H[0] > 0.0)) throw std::domain_error("bundle_warped_ricci: warps must be positive");
    const double f = F[0], h = H[0];
    const double cross = F[1] * H[1] / (f * h);
    CurvaturePoint c;
    c.t = t;
    c.set("Ric(dt,dt)", -m.q * F[2] / f - m.p * H[2] / h);
    c.set("Ric(X,X)_lb", -F[2] / f + (m.ricci_base_lb * (m.q - 1) - (m.q - 1) * F[1] * F[1]) / (f * f) -
                             m.p * cross - 2.0 * h * h / (f * f * f * f) * m.a.sup_AX2);
    // the non-negative (AV,AV) term is left out of the lower bound
    c.set("Ric(V,V)_lb", -H[2] / h + (m.ricci_fibre_lb * (m.p - 1) - (m.p - 1) * H[1] * H[1]) / (h * h) - m.q * cross);
    c.set("|Ric(X,V)|_ub", h / (f * f * f) * m.a.sup_deltaA);
    return c;
}

ShrinkBounds submersion_shrink_bounds(double ric_base_lb, double ric_fibre_lb, const ATensorBounds& a, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("submersion_shrink_bounds: r must be positive");
    ShrinkBounds out;
    out.bounds.t = r;
    out.bounds.set("Ric(U,U)_lb", ric_fibre_lb / (r * r));
    out.bounds.set("Ric(X,X)_lb", ric_base_lb - 2.0 * r * r * a.sup_AX2);
    out.bounds.set("|Ric(U,X)|_ub", r * r * a.sup_deltaA);
    if (ric_base_lb > 0.0 && ric_fibre_lb > 0.0) {
        out.r_star = a.sup_AX2 > 0.0 ? std::sqrt(ric_base_lb / (2.0 * a.sup_AX2))
                                     : std::numeric_limits<double>::infinity();
    }
    return out;
}

CurvaturePoint cohomog1_ricci(const CohomOneMetric& m, double t, CohomFamily family) {
    const int d = family == CohomFamily::wu ? 2 : m.d;
    const int n = family == CohomFamily::wu ? 2 : m.n;
    const double k = (n - 1) * d;
    const Jet F = m.f.jet(t), H = m.h.jet(t);
    const bool fz = std::abs(F[0]) < kZero, hz = std::abs(H[0]) < kZero;
    CurvaturePoint c;
    c.t = t;
    if (fz && hz) {
        // both warps close with unit slope; the singular terms cancel in pairs
        if (std::abs(F[1] - 1.0) > 1e-6 || std::abs(H[1] - 1.0) > 1e-6)
            throw UndeclaredCollapse("double collapse needs f' = h' = 1");
        const double F3 = F[3], H3 = H[3];
        const double v = -(d - 1) * F3 - k * H3;
        c.set("Ric(dt,dt)", v);
        c.set("Ric(V,V)", v);
        c.set("Ric(X,X)", v);
        return c;
    }
    if (hz) throw UndeclaredCollapse("cohomog1_ricci: h vanishes while f does not");
    const double endpoint = t < 0 ? m.f.lo() : m.f.hi();
    const WarpTerms w = warp_terms(F, H, t, fz ? std::vector<double>{endpoint} : std::vector<double>{});
    const double h = H[0];
    const double q4 = fz ? 0.0 : F[0] * F[0] / (h * h * h * h);
    c.set("Ric(dt,dt)", -(d - 1) * w.f2 - k * w.h2);
    c.set("Ric(V,V)", -w.f2 + (d - 2) * w.fs - k * w.cross + k * q4);
    c.set("Ric(X,X)", -w.h2 + (k - 1) * w.hs - (d - 1) * w.cross + 3.0 * (d - 1) / (h * h) - 2.0 * (d - 1) * q4);
    return c;
}

// ---------------------------------------------------------------------------

namespace {

using Christoffel = std::vector<Eigen::MatrixXd>;  // Gamma[k](i,j)

Christoffel christoffel(const MetricChart& g, const Eigen::VectorXd& x, double step) {
    const int n = static_cast<int>(x.size());
    std::vector<Eigen::MatrixXd> dg(n);  // dg[l] = d_l g
    for (int l = 0; l < n; ++l) {
        Eigen::VectorXd xp = x, xm = x;
        xp(l) += step;
        xm(l) -= step;
        dg[l] = (g(xp) - g(xm)) / (2.0 * step);
    }
    const Eigen::MatrixXd ginv = g(x).inverse();
    Christoffel G(n, Eigen::MatrixXd::Zero(n, n));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int l = 0; l < n; ++l) s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
                G[k](i, j) = 0.5 * s;
            }
    return G;
}

}  // namespace

Eigen::MatrixXd fd_ricci(const MetricChart& g, const Eigen::VectorXd& x, const FdOptions& opt) {
    const int n = static_cast<int>(x.size());
    const double hstep = opt.step;
    const Christoffel G = christoffel(g, x, hstep);
    std::vector<Christoffel> dG(n);  // dG[m] = d_m Gamma
    for (int m = 0; m < n; ++m) {
        Eigen::VectorXd xp = x, xm = x;
        xp(m) += hstep;
        xm(m) -= hstep;
        const Christoffel Gp = christoffel(g, xp, hstep), Gm = christoffel(g, xm, hstep);
        dG[m].resize(n);
        for (int k = 0; k < n; ++k) dG[m][k] = (Gp[k] - Gm[k]) / (2.0 * hstep);
    }
    Eigen::MatrixXd Ric = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) {
                s += dG[k][k](i, j) - dG[j][k](i, k);
                for (int l = 0; l < n; ++l) s += G[k](k, l) * G[l](i, j) - G[k](j, l) * G[l](i, k);
            }
            Ric(i, j) = s;
        }
    return 0.5 * (Ric + Ric.transpose());
}

Eigen::VectorXd ricci_eigenvalues(const MetricChart& g, const Eigen::VectorXd& x, const FdOptions& opt) {
    const Eigen::MatrixXd Ric = fd_ricci(g, x, opt);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ric, g(x));
    return es.eigenvalues();
}

MetricChart doubly_warped_chart(const DoublyWarpedMetric& m) {
    const int p = m.p, q = m.q;
    const SmoothCurve f = m.f, h = m.h;
    return [p, q, f, h](const Eigen::VectorXd& x) {
        const int n = 1 + p + q;
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
        g(0, 0) = 1.0;
        const double fv = f(x(0)), hv = h(x(0));
        double w = fv * fv;
        for (int k = 0; k < p; ++k) {
            g(1 + k, 1 + k) = w;
            w *= std::pow(std::sin(x(1 + k)), 2);
        }
        w = hv * hv;
        for (int k = 0; k < q; ++k) {
            g(1 + p + k, 1 + p + k) = w;
            w *= std::pow(std::sin(x(1 + p + k)), 2);
        }
        return g;
    };
}

Eigen::MatrixXd fd_curvature_oracle(const DoublyWarpedMetric& m, const Eigen::VectorXd& x, const FdOptions& opt) {
    const int n = 1 + m.p + m.q;
    if (x.size() != n) throw std::invalid_argument("fd_curvature_oracle: coordinate tuple has wrong length");
    // the two-level stencil reaches 2 steps out
    const double reach = 2.0 * opt.step;
    if (x(0) - reach < m.f.lo() || x(0) + reach > m.f.hi() || x(0) - reach < m.h.lo() || x(0) + reach > m.h.hi())
        throw ChartBoundary("fd_curvature_oracle: t too close to the chart boundary");
    auto check_angles = [&](int first, int count) {
        // all but the last angle of each sphere live in (0, pi)
        for (int k = 0; k + 1 < count; ++k) {
            const double a = x(first + k);
            if (a - reach <= 0.0 || a + reach >= M_PI)
                throw ChartBoundary("fd_curvature_oracle: angle too close to a coordinate pole");
        }
    };
    check_angles(1, m.p);
    check_angles(1 + m.p, m.q);
    const double fv = m.f(x(0)), hv = m.h(x(0));
    if (std::abs(fv) < 10.0 * reach || std::abs(hv) < 10.0 * reach)
        throw ChartBoundary("fd_curvature_oracle: warp too close to zero for the chart");
    return fd_ricci(doubly_warped_chart(m), x, opt);
}

}  // namespace rb
