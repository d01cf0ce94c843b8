#include "riccibench/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include "riccibench/gluing.hpp"

namespace rb {

namespace {

constexpr double kPi = M_PI;
constexpr double kInf = std::numeric_limits<double>::infinity();

Margin single_margin(const std::string& label, double value, double at) {
    Margin m{label};
    m.update(value, at);
    return m;
}


void add_all(BlockReport& r, const std::vector<Margin>& ms, const std::string& prefix = "") {
    for (auto m : ms) {
        m.label = prefix + m.label;
        r.add(std::move(m));
    }
}

double parity_violation(const ParityReport& p) { return std::max(p.max_violation, p.target_deviation); }

Margin parity_check(const std::string& label, const SmoothCurve& c, double at, Parity parity,
                    std::optional<double> target = std::nullopt) {
    return single_margin(label, 1e-9 - parity_violation(parity_margin(c, at, parity, target)), at);
}

// derivatives in the arclength of P(s) ds^2, given P, P', P''
Jet arclength_jet(const Jet& u, double P, double P1, double P2) {
    const double L = std::sqrt(P);
    const double L1 = P1 / (2.0 * L);
    const double L2 = (0.5 * P2 - L1 * L1) / L;
    const Jet inv{0.0, 1.0 / L, -L1 / (L * L * L), (3.0 * L1 * L1 - L * L2) / std::pow(L, 5)};
    return jet_compose(u, inv);
}

// sectional curvatures of dsigma^2 + u(sigma)^2 (round sphere)
struct WarpSec {
    double radial, tangential;
};

WarpSec warp_sec(const Jet& u_sigma) {
    return {-u_sigma[2] / u_sigma[0], (1.0 - u_sigma[1] * u_sigma[1]) / (u_sigma[0] * u_sigma[0])};
}

Sweep make_sweep(const std::string& name, const std::string& axis, const std::vector<double>& ts,
                 const std::vector<std::pair<std::string, std::function<double(double)>>>& cols) {
    Sweep s;
    s.name = name;
    s.axis = axis;
    s.axis_values = ts;
    for (const auto& [label, fn] : cols) {
        auto& col = s.columns[label];
        col.reserve(ts.size());
        for (double t : ts) col.push_back(fn(t));
    }
    return s;
}

std::vector<double> sample(const std::vector<double>& ts, const std::function<double(double)>& fn) {
    std::vector<double> out;
    out.reserve(ts.size());
    for (double t : ts) out.push_back(fn(t));
    return out;
}

double bisect(const std::function<double(double)>& g, double lo, double hi, int iters = 200) {
    double glo = g(lo);
    for (int i = 0; i < iters && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = g(mid);
        if ((gm > 0.0) == (glo > 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

double boundary_conformal_margin(double c, double C) {
    require(c >= 0.0 && C > 0.0, "boundary_conformal_margin: need c >= 0, C > 0");
    return 1.0 - c * (3.0 / (C * C) + 1.0 / C);
}

// ---- cone -------------------------------------------------------------------------

ConeResult build_cone_metric(const ConeParams& p, int grid) {
    require(p.n >= 3, "cone: n >= 3");
    require(p.K > 0.0 && p.K < 1.0, "cone: K in (0,1)");
    require(p.eps1 > 0.0 && p.eps2 > 0.0, "cone: eps1, eps2 > 0");
    require(p.delta > 0.0 && p.delta < 1.0, "cone: delta in (0,1)");
    require(p.t >= 0.0 && p.t <= 1.0, "cone: t in [0,1]");
    const double K = p.K, t = p.t;
    const double Kt = 1.0 - t * (1.0 - K);
    const double e2p = 2.0 * p.eps2 / (1.0 - p.delta);
    const double s1 = p.eps1 / (2.0 * K);
    const double s_lo = (1.0 - K) * t * s1;
    const double s2 = (kPi + e2p) / (2.0 * Kt);
    const double s_hi = kPi / (2.0 * Kt) + 0.5 * e2p * (1.0 + 1.0 / Kt);
    const double w = p.delta;
    if (!(s_lo < s1 - w)) throw BandInfeasible("cone: junction s1 window reaches the collapse end", s_lo - (s1 - w));
    if (!(s1 + w < s2 - w)) throw BandInfeasible("cone: junction windows s1 and s2 overlap", (s1 + w) - (s2 - w));
    if (!(s2 + w < s_hi)) throw BandInfeasible("cone: junction s2 window passes the outer end", s2 + w - s_hi);

    const Interval dom{s_lo, s_hi};
    const SmoothCurve chi1 = affine(1.0, -(1.0 - K) * s1 * t, dom);
    const SmoothCurve chi2 = affine(Kt, 0.0, dom);
    const SmoothCurve chi3 = affine(1.0, -0.5 * (kPi + e2p) * (1.0 / Kt - 1.0), dom);
    const double band_tol = 1e-10;
    SmoothCurve chi;
    try {
        chi = smooth_join(chi1, chi2, {s1 - w, s1 + w}, Interval{-kInf, 0.0}, band_tol);
    } catch (const BandInfeasible& e) {
        throw BandInfeasible(std::string("cone: junction s1: ") + e.what(), e.overshoot());
    }
    try {
        chi = smooth_join(chi, chi3, {s2 - w, s2 + w}, Interval{0.0, kInf}, band_tol);
    } catch (const BandInfeasible& e) {
        throw BandInfeasible(std::string("cone: junction s2: ") + e.what(), e.overshoot());
    }
    for (const auto& [name, s] : {std::pair{"s1", s1}, std::pair{"s2", s2}}) {
        const double over = band_overshoot(chi, {s - w, s + w}, {Kt, 1.0}, 1);
        if (over > band_tol)
            throw BandInfeasible(std::string("cone: junction ") + name + ": slope leaves [K_t, 1]", over);
    }
    const SmoothCurve f = compose(sine(1.0, 1.0, 0.0, {chi(s_lo) - 1.0, chi(s_hi) + 1.0}), chi);

    const int n = p.n;
    const double bound = (n - 1) * Kt * Kt;
    // Ric(ds,ds) = -(n-1) f''/f, Ric(X,X) = -f''/f + (n-2)(1-f'^2)/f^2, series limits at the collapse end
    auto ricci = [f, n, s_lo](double s) {
        const Jet F = f.jet(s);
        double f2, fs;
        if (s <= s_lo + 1e-14 || std::abs(F[0]) < 1e-13) {
            f2 = F[3] / F[1];
            fs = -F[3] / F[1];
        } else {
            f2 = F[2] / F[0];
            fs = (1.0 - F[1] * F[1]) / (F[0] * F[0]);
        }
        return std::pair{-(n - 1) * f2, -f2 + (n - 2) * fs};
    };
    const auto ts = linspace(s_lo, s_hi, grid);

    ConeResult out{f, chi, {}};
    BlockReport& r = out.report;
    r.block = "cone";
    r.params = {{"n", n}, {"K", K}, {"eps1", p.eps1}, {"eps2", p.eps2}, {"delta", p.delta}, {"t", t}};
    r.add(scan_margin("Ric(ds,ds)_minus_bound", ts,
                      [&](double s) { return ricci(s).first - bound + kNonstrictSlack; }));
    r.add(scan_margin("Ric(X,X)_minus_bound", ts,
                      [&](double s) { return ricci(s).second - bound + kNonstrictSlack; }));
    r.add(scan_margin("chi_slope_in_band", ts, [&](double s) {
        const double d = chi.eval(s, 1);
        return std::min(d - Kt, 1.0 - d) + kNonstrictSlack;
    }));
    r.add(parity_check("parity_at_collapse", f, s_lo, Parity::odd, 1.0));
    if (t == 1.0) {
        // K^2 g: Ricci bounds divide by K^2, the middle piece becomes K sin
        r.add(scan_margin("rescaled_Ric(ds,ds)_minus_(n-1)", ts,
                          [&](double s) { return ricci(s).first / (K * K) - (n - 1) + kNonstrictSlack; }));
        r.add(scan_margin("rescaled_Ric(X,X)_minus_(n-1)", ts,
                          [&](double s) { return ricci(s).second / (K * K) - (n - 1) + kNonstrictSlack; }));
        double dev = 0.0;
        for (double u : linspace(K * (s1 + w), K * (s2 - w), grid))
            dev = std::max(dev, std::abs(K * f(u / K) - K * std::sin(u)));
        r.add(single_margin("middle_piece_is_K_sin", 1e-9 - dev, K * (s1 + w)));
        r.aux["middle_piece_deviation"] = dev;
    }
    r.aux["K_t"] = Kt;
    r.aux["eps2_prime"] = e2p;
    r.aux["s1"] = s1;
    r.aux["s2"] = s2;
    r.boundary.faces.push_back(FaceProfile{"outer", n - 1, FaceKind::warped_sphere, {s_hi},
                                           {{"warp", {f(s_hi)}}},
                                           {{"sphere", {f.eval(s_hi, 1) / f(s_hi)}}}, {}, {{"warp", f.jet(s_hi)}}, "hi"});
    r.sweeps.push_back(make_sweep("cone_ricci", "s", ts,
                                  {{"Ric(ds,ds)", [&](double s) { return ricci(s).first; }},
                                   {"Ric(X,X)", [&](double s) { return ricci(s).second; }},
                                   {"bound", [&](double) { return bound; }},
                                   {"f", [&](double s) { return f(s); }}}));
    return out;
}

// ---- handle1 ----------------------------------------------------------------------

double corner_angle_handle1(double lambda1, double eps1) {
    const double x = lambda1 * (kPi / 2 - eps1);
    require(x > 0.0 && x < kPi / 2, "corner_angle_handle1: need 0 < lambda1 (pi/2 - eps1) < pi/2");
    const double c = std::cos(x), s = std::sin(x);
    const double ap = s / (c * c), bp = -2.0, f = 1.0 / c;
    const double q = -(ap * bp + f * f) / (std::sqrt(ap * ap + f * f) * std::sqrt(bp * bp + f * f));
    return std::acos(std::clamp(q, -1.0, 1.0));
}

namespace {

// alpha = (1/l1)(sec(l1 (s - e1)) - 1), even about e1
Jet alpha_closed(double s, double l1, double e1) {
    const double x = l1 * (s - e1);
    const double sc = 1.0 / std::cos(x), tn = std::tan(x);
    return Jet{(sc - 1.0) / l1, sc * tn, l1 * (2.0 * sc * sc * sc - sc), l1 * l1 * sc * tn * (6.0 * sc * sc - 1.0)};
}

// height alpha~ with alpha~'' = S((s-a)/W) alpha'' on [a, a+W], zero before, alpha + shift after
SmoothCurve smoothed_alpha(double l1, double e1, double s_end, double& a_out) {
    const double W = e1;
    auto mismatch = [=](double a) {
        const Antiderivative rest(
            [=](double s) { return (1.0 - smooth_step((s - a) / W)[0]) * alpha_closed(s, l1, e1)[2]; }, a, a + W, 64);
        return -alpha_closed(a, l1, e1)[1] - rest.total();
    };
    const double a = bisect(mismatch, e1 - W, e1, 100);
    const double c = a + W;
    auto d1 = std::make_shared<Antiderivative>(
        [=](double s) { return smooth_step((s - a) / W)[0] * alpha_closed(s, l1, e1)[2]; }, a, c, 128);
    auto d0 = std::make_shared<Antiderivative>([d1](double s) { return (*d1)(s); }, a, c, 128);
    const double shift = d0->total() - alpha_closed(c, l1, e1)[0];
    a_out = a;
    return SmoothCurve(
        Interval{0.0, s_end},
        [=](double s) {
            if (s <= a) return Jet{0.0, 0.0, 0.0, 0.0};
            if (s >= c) {
                Jet j = alpha_closed(s, l1, e1);
                j[0] += shift;
                return j;
            }
            const Jet S = smooth_step((s - a) / W), A = alpha_closed(s, l1, e1);
            return Jet{(*d0)(s), (*d1)(s), S[0] * A[2], S[1] / W * A[2] + S[0] * A[3]};
        },
        Provenance::blended);
}

// drop on [s0, s0+e2]: beta(s0) = 0, beta'(s0) = -2, beta'' flat-topped and vanishing at the end
SmoothCurve outer_drop(double s0, double e2) {
    const double w = e2 / 4.0, sig0 = e2 - w, kappa = 2.0 / (e2 - w / 2.0);
    auto step_int = std::make_shared<Antiderivative>([](double u) { return smooth_step(u)[0]; }, 0.0, 1.0, 128);
    auto dbeta = [=](double sig) {
        if (sig <= sig0) return -2.0 + kappa * sig;
        const double u = std::min((sig - sig0) / w, 1.0);
        return -2.0 + kappa * (sig0 + w * (u - (*step_int)(u)));
    };
    auto b0 = std::make_shared<Antiderivative>(dbeta, 0.0, e2, 256);
    return SmoothCurve(
        Interval{s0, s0 + e2},
        [=](double s) {
            const double sig = std::clamp(s - s0, 0.0, e2);
            const Jet S = smooth_step((sig - sig0) / w);
            return Jet{(*b0)(sig), dbeta(sig), kappa * (1.0 - S[0]), -kappa * S[1] / w};
        },
        Provenance::blended);
}

struct GraphFace {
    Jet u;       // warp K f(gamma) sin(s), in s
    double P, P1, P2;  // speed^2 = gamma'^2 + f(gamma)^2 and its derivatives
    Jet F;       // f(gamma(s)) in s
};

GraphFace graph_face(const SmoothCurve& f, const SmoothCurve& gamma, double K, double s) {
    const Jet g = gamma.jet(s);
    const Jet F = jet_compose(f.jet(g[0]), g);
    const Jet R{K * std::sin(s), K * std::cos(s), -K * std::sin(s), -K * std::cos(s)};
    GraphFace out;
    out.u = jet_product(F, R);
    out.F = F;
    out.P = g[1] * g[1] + F[0] * F[0];
    out.P1 = 2.0 * g[1] * g[2] + 2.0 * F[0] * F[1];
    out.P2 = 2.0 * g[2] * g[2] + 2.0 * g[1] * g[3] + 2.0 * F[1] * F[1] + 2.0 * F[0] * F[2];
    return out;
}

// principal curvatures (radial, sphere) of the graph t = gamma(s)
std::pair<double, double> graph_eigen(const SmoothCurve& f, const SmoothCurve& R, const SmoothCurve& gamma, double s) {
    const IIProfile ii = graph_II(f, R, gamma, s);
    const Jet g = gamma.jet(s);
    const double F = f(g[0]);
    return {ii.at("radial") / (g[1] * g[1] + F * F), ii.at("sphere") / (F * F)};
}

}  // namespace

Handle1Result build_handle1(const Handle1Params& p, int grid) {
    const double l1 = p.lambda1, l2 = p.lambda2, e1 = p.eps1, e2 = p.eps2, K = p.K;
    require(p.n >= 3, "handle1: n >= 3");
    require(l1 > 0.0 && l1 < l2 && l2 < 1.0, "handle1: need 0 < lambda1 < lambda2 < 1");
    require(e1 > 0.0 && e1 < kPi / 2, "handle1: eps1 in (0, pi/2)");
    require(e2 > 0.0 && e2 < 1.0, "handle1: eps2 in (0, 1)");
    require(K > 0.0 && K < 1.0, "handle1: K in (0,1)");
    require(p.delta > 0.0, "handle1: delta > 0");
    const double half = kPi / 2;

    double a_smooth = 0.0;
    const SmoothCurve alpha = smoothed_alpha(l1, e1, half, a_smooth);
    const double alpha_c = alpha(half);
    const SmoothCurve beta = outer_drop(half, e2);
    const SmoothCurve outer_height = shifted(beta, alpha_c);
    const double rho_end = alpha_c + beta(half + e2);

    Handle1Result out;
    out.f = make_fH({l1, l2, p.delta, alpha_c + 2.0, std::nullopt});
    const SmoothCurve& f = out.f.f;
    out.alpha = alpha;
    out.beta = beta;
    out.f_end = f(rho_end);
    const SmoothCurve Rwarp = sine(K, 1.0, 0.0, {0.0, kPi});

    BlockReport& r = out.report;
    r.block = "handle1";
    r.params = {{"n", p.n}, {"K", K}, {"lambda1", l1}, {"lambda2", l2}, {"eps1", e1}, {"eps2", e2}, {"delta", p.delta}};

    // (a) graph over the annulus up to the corner
    const auto sa = linspace(a_smooth, half, grid);
    r.add(scan_margin("a_II_radial", sa, [&](double s) { return graph_II(f, Rwarp, alpha, s).at("radial"); }));
    r.add(scan_margin("a_II_sphere", sa, [&](double s) { return graph_II(f, Rwarp, alpha, s).at("sphere"); }));
    r.add(scan_margin("a_tan_chain", linspace(e1, half, grid), [&](double s) {
        // lambda1 tan s - tan(lambda1 (s - eps1)), multiplied by cos s cos(lambda1 (s - eps1)) > 0
        const double x = l1 * (s - e1);
        return l1 * std::sin(s) * std::cos(x) - std::cos(s) * std::sin(x);
    }));

    // (b) drop to the outer constant height
    const auto sb = linspace(half, half + e2, grid);
    r.add(scan_margin("b_II_radial", sb, [&](double s) { return graph_II(f, Rwarp, outer_height, s).at("radial"); }));
    r.add(scan_margin("b_II_sphere", sb, [&](double s) { return graph_II(f, Rwarp, outer_height, s).at("sphere"); }));
    {
        const double F = f(alpha_c), dF = f.eval(alpha_c, 1), bp = beta.eval(half, 1);
        r.add(single_margin("b_corner_sphere_II", -F * dF * bp / std::sqrt(bp * bp + F * F), half));
    }
    r.add(single_margin("b_beta_in_range", 1.0 + beta(half + e2) + kNonstrictSlack, half + e2));
    r.add(single_margin("b_outer_slice_II", f.eval(rho_end, 1) / out.f_end, half + e2));

    // (c) cap face: closed-form profile for the linear f, and the actual warp in arclength
    const double r_max = std::tan(l1 * (half - e1)) / l1;
    r.add(scan_margin("c_phi_concave", linspace(0.0, r_max, grid), [&](double rr) {
        const double q = 1.0 + l1 * l1 * rr * rr;
        return -std::sin(std::atan(l1 * rr) / l1 + e1) * (l1 * l1 - 1.0) / std::pow(q, 1.5);
    }));
    r.add(single_margin("c_phi_slope_below_one", 1.0 - std::cos(e1), 0.0));
    auto cap_sec = [&](double s) {
        const GraphFace g = graph_face(f, alpha, K, s);
        return warp_sec(arclength_jet(g.u, g.P, g.P1, g.P2));
    };
    r.add(scan_margin("c_cap_sec_radial", sa, [&](double s) { return cap_sec(s).radial; }));
    r.add(scan_margin("c_cap_sec_tangential", sa, [&](double s) { return cap_sec(s).tangential; }));

    // (d) corner angle
    const double ap = alpha.eval(half, 1), bp = beta.eval(half, 1), Fc = f(alpha_c);
    const double cos_theta = -(ap * bp + Fc * Fc) / (std::sqrt(ap * ap + Fc * Fc) * std::sqrt(bp * bp + Fc * Fc));
    out.theta = std::acos(std::clamp(cos_theta, -1.0, 1.0));
    const double theta_lin = corner_angle_handle1(l1, e1);
    r.add(single_margin("d_corner_angle_below_half_pi", cos_theta, half));
    r.add(single_margin("d_closed_form_angle_sign", 2.0 * std::sin(l1 * (half - e1)) - 1.0, half));
    r.add(single_margin("d_linear_f_agreement", 10.0 * (l2 - l1) - std::abs(out.theta - theta_lin), half));

    // (e) inner face
    const double lambda = f.eval(-p.delta, 1);
    r.add(single_margin("e_inner_II_at_least_minus_lambda", -lambda + lambda + kNonstrictSlack, -p.delta));
    r.add(single_margin("e_lambda_below_one", 1.0 - lambda, -p.delta));
    add_all(r, fH_margins(out.f, l1, grid), "f.");

    // outer face warp in arclength from the corner
    auto arc = std::make_shared<Antiderivative>(
        [=](double s) {
            const GraphFace g = graph_face(f, outer_height, K, s);
            return std::sqrt(g.P);
        },
        half, half + e2, 256);
    const double sigma_end = arc->total();
    auto s_of_sigma = [arc, half, e2](double sig) {
        return bisect([&](double s) { return (*arc)(s) - sig; }, half, half + e2, 80);
    };
    out.B = SmoothCurve(
        Interval{0.0, sigma_end},
        [=](double sig) {
            const double s = sig <= 0.0 ? half : s_of_sigma(sig);
            const GraphFace g = graph_face(f, outer_height, K, s);
            return arclength_jet(g.u, g.P, g.P1, g.P2);
        },
        Provenance::blended);
    const auto sig_grid = linspace(0.0, sigma_end, std::max(64, grid / 16));
    r.add(scan_margin("b_outer_face_sec_radial", sig_grid, [&](double sg) { return warp_sec(out.B.jet(sg)).radial; }));
    r.add(scan_margin("b_outer_face_sec_tangential", sig_grid,
                      [&](double sg) { return warp_sec(out.B.jet(sg)).tangential; }));

    r.aux["theta"] = out.theta;
    r.aux["theta_linear"] = theta_lin;
    r.aux["lambda"] = lambda;
    r.aux["alpha_top"] = alpha_c;
    r.aux["f_end"] = out.f_end;
    r.aux["smoothing_start"] = a_smooth;
    r.aux["r_max"] = r_max;
    r.aux["sigma_end"] = sigma_end;

    // boundary
    const double f_in = f(-p.delta);
    r.boundary.faces.push_back(
        FaceProfile{"inner", p.n, FaceKind::warped_sphere, {0.0}, {{"scale", {f_in}}}, {{"all", {-lambda / f_in}}}});
    {
        FaceProfile cap{"cap", p.n, FaceKind::warped_sphere, {}, {}, {}, {{"c1", "hi"}}};
        const auto sc = linspace(a_smooth, half, std::max(64, grid / 16));
        cap.param = sc;
        cap.metric["warp"] = sample(sc, [&](double s) { return graph_face(f, alpha, K, s).u[0]; });
        cap.metric["speed"] = sample(sc, [&](double s) { return std::sqrt(graph_face(f, alpha, K, s).P); });
        cap.ii["radial"] = sample(sc, [&](double s) { return graph_eigen(f, Rwarp, alpha, s).first; });
        cap.ii["sphere"] = sample(sc, [&](double s) { return graph_eigen(f, Rwarp, alpha, s).second; });
        cap.end_jets["warp"] = arclength_jet(graph_face(f, alpha, K, half).u, graph_face(f, alpha, K, half).P,
                                             graph_face(f, alpha, K, half).P1, graph_face(f, alpha, K, half).P2);
        r.boundary.faces.push_back(std::move(cap));
    }
    {
        FaceProfile outer{"outer", p.n, FaceKind::warped_sphere, sig_grid, {}, {}, {{"c1", "lo"}}};
        outer.metric["warp"] = sample(sig_grid, [&](double sg) { return out.B(sg); });
        std::vector<double> rad, sph;
        for (double sg : sig_grid) {
            const auto [e_r, e_s] = graph_eigen(f, Rwarp, outer_height, sg <= 0.0 ? half : s_of_sigma(sg));
            rad.push_back(e_r);
            sph.push_back(e_s);
        }
        outer.ii["radial"] = rad;
        outer.ii["sphere"] = sph;
        outer.end_jets["warp"] = out.B.jet(0.0);
        r.boundary.faces.push_back(std::move(outer));
    }
    r.boundary.corners.push_back(Corner{"c1", {out.theta}, {"cap", "outer"}});

    r.sweeps.push_back(make_sweep("handle1_cap_II", "s", sa,
                                  {{"radial", [&](double s) { return graph_II(f, Rwarp, alpha, s).at("radial"); }},
                                   {"sphere", [&](double s) { return graph_II(f, Rwarp, alpha, s).at("sphere"); }},
                                   {"alpha", [&](double s) { return alpha(s); }}}));
    // linear-f cap profile: s(r) = arctan(l1 r)/l1 + e1, phi = sin(s) sqrt(1 + l1^2 r^2)
    r.sweeps.push_back(make_sweep("handle1_cap_profile", "r", linspace(0.0, r_max, grid),
                                  {{"phi",
                                    [&](double rr) {
                                        return std::sin(std::atan(l1 * rr) / l1 + e1) * std::sqrt(1.0 + l1 * l1 * rr * rr);
                                    }},
                                   {"phi''", [&](double rr) {
                                        const double q = 1.0 + l1 * l1 * rr * rr;
                                        return std::sin(std::atan(l1 * rr) / l1 + e1) * (l1 * l1 - 1.0) / std::pow(q, 1.5);
                                    }}}));
    r.sweeps.push_back(
        make_sweep("handle1_outer_II", "s", sb,
                   {{"radial", [&](double s) { return graph_II(f, Rwarp, outer_height, s).at("radial"); }},
                    {"sphere", [&](double s) { return graph_II(f, Rwarp, outer_height, s).at("sphere"); }},
                    {"beta", [&](double s) { return beta(s); }}}));
    return out;
}

// ---- handle2 ----------------------------------------------------------------------

double handle2_closed_form_margin(double lambda1, double lambda2, double a, double b, double alpha) {
    return -a * a * lambda2 * (1.0 + lambda2 * b) - 2.0 * lambda2 / (1.0 + lambda1 * alpha) + 1.0 / (b - alpha);
}

double handle2_corner_angle(double a) { return std::acos(-a / std::sqrt(1.0 + a * a)); }

Handle2Result build_handle2(const SmoothCurve& B, const Handle2Params& p, int grid) {
    const double l1 = p.lambda1, l2 = p.lambda2, a = p.a, b = p.b;
    require(l1 > 0.0 && l1 < l2 && l2 < 1.0, "handle2: need 0 < lambda1 < lambda2 < 1");
    require(a > 0.0, "handle2: a > 0");
    require(b > 1.0, "handle2: b > 1");
    require(p.eps > 0.0 && p.nu >= 0.0, "handle2: eps > 0, nu >= 0");
    if (!(b < 1.0 / (2.0 * l2))) throw std::invalid_argument("handle2: b >= 1/(2 lambda2)");
    const Jet J = B.jet(B.lo());
    if (!(J[1] < 0.0 && J[2] < 0.0)) throw std::invalid_argument("handle2: boundary needs B' < 0 and B'' < 0 at s = 0");
    const double t0 = p.t0.value_or(b + 2.0);
    const double width = p.flatten_width;
    require(width > 0.0 && t0 - width > b, "handle2: flattening window must lie beyond b");

    // cubic extension past the boundary, B''' raised to 0 so that B'' stays negative
    const double kappa = std::max(0.0, J[3]);
    double root;
    if (kappa == 0.0) {
        root = -J[1] / J[2];
    } else {
        root = (-J[2] - std::sqrt(J[2] * J[2] - 2.0 * kappa * J[1])) / kappa;
    }
    const double delta_prime = -root;
    const double ext_lo = -4.0 * (delta_prime + 1.0);
    Handle2Result out;
    out.B_ext = SmoothCurve(Interval{ext_lo, 0.0}, [J, kappa](double s) {
        return Jet{J[0] + J[1] * s + 0.5 * J[2] * s * s + kappa * s * s * s / 6.0, J[1] + J[2] * s + 0.5 * kappa * s * s,
                   J[2] + kappa * s, kappa};
    });
    const SmoothCurve& Bx = out.B_ext;

    auto dbeta = [a, b](double t) { return a * (t / b - 1.0) * cutoff_chi(t - b)[0]; };
    auto b0 = std::make_shared<Antiderivative>(dbeta, 0.0, b, 256);
    const double beta_b = b0->total();
    out.beta = SmoothCurve(Interval{0.0, t0}, [a, b, b0, beta_b](double t) {
        if (t >= b) return Jet{beta_b, 0.0, 0.0, 0.0};
        const Jet X = cutoff_chi(t - b);
        const double lin = a * (t / b - 1.0);
        return Jet{(*b0)(t), lin * X[0], a / b * X[0] + lin * X[1], 2.0 * a / b * X[1] + lin * X[2]};
    });
    const SmoothCurve& beta = out.beta;

    const FHCurve fh = make_fH({l1, l2, p.fH_delta, t0 + 1.0, std::nullopt});
    out.f = flatten_at(fh.f, t0, width, t0);
    const SmoothCurve& f = out.f;
    out.theta = handle2_corner_angle(a);

    BlockReport& r = out.report;
    r.block = "handle2";
    r.params = {{"n", p.n},   {"lambda1", l1}, {"lambda2", l2}, {"a", a},
                {"b", b},     {"eps", p.eps},  {"nu", p.nu},    {"t0", t0},
                {"flatten_width", width},      {"fH_delta", p.fH_delta}};

    r.add(single_margin("corner_angle_within_eps", kPi / 2 + p.eps - out.theta + kNonstrictSlack, 0.0));

    // radial II of the down-oriented graph, multiplied by beta'^2 > 0 (finite up to t = b)
    auto bracket = [&](double t) {
        const Jet F = f.jet(t);
        const double bp = beta.eval(t, 1);
        const Jet X = cutoff_chi(t - b);
        const double tail = X[0] > 0.0 ? -X[1] / X[0] : kInf;
        return -bp * bp * F[1] * F[0] - 2.0 * F[1] / F[0] + 1.0 / (b - t) + tail;
    };
    auto closed = [&](double t) { return handle2_closed_form_margin(l1, l2, a, b, t); };
    std::vector<double> tb = linspace(0.0, b, grid);
    tb.pop_back();
    r.add(scan_margin("II_radial_bracket", tb, bracket));
    r.add(scan_margin("II_radial_closed_form", tb, closed));
    r.add(scan_margin("closed_form_conservative", tb, [&](double t) {
        const double m = bracket(t);
        return std::isinf(m) ? kInf : m - closed(t) + kNonstrictSlack;
    }));

    // sphere II times f |beta'| sqrt(1 + beta'^2 f^2) > 0
    auto sphere_sign = [&](double t) {
        const Jet F = f.jet(t);
        const double bt = beta(t), bp = beta.eval(t, 1);
        return -F[1] * F[0] * std::abs(bp) - Bx.eval(bt, 1) / Bx(bt);
    };
    const double t_guard = t0 - kFlatEndGuard * width;
    const auto ts = linspace(0.0, t_guard, grid);
    r.add(scan_margin("II_sphere", ts, sphere_sign));

    r.add(single_margin("beta_within_extension", beta_b + delta_prime, b));
    const auto se = linspace(beta_b, 0.0, grid);
    r.add(scan_margin("extension_decreasing", se, [&](double s) { return -Bx.eval(s, 1); }));
    r.add(scan_margin("extension_concave", se, [&](double s) { return -Bx.eval(s, 2); }));
    r.add(scan_margin("extension_slope_below_one", se, [&](double s) {
        const double d = Bx.eval(s, 1);
        return 1.0 - d * d;
    }));

    // side face (1 + beta'^2 f^2) dt^2 + f^2 B(beta)^2
    auto side = [&](double t) {
        const Jet F = f.jet(t), bj = beta.jet(t);
        const Jet Bb = jet_compose(Bx.jet(bj[0]), bj);
        const Jet u = jet_product(F, Bb);
        const double P = 1.0 + bj[1] * bj[1] * F[0] * F[0];
        const double P1 = 2.0 * bj[1] * bj[2] * F[0] * F[0] + 2.0 * bj[1] * bj[1] * F[0] * F[1];
        const double P2 = 2.0 * bj[2] * bj[2] * F[0] * F[0] + 2.0 * bj[1] * bj[3] * F[0] * F[0] +
                          8.0 * bj[1] * bj[2] * F[0] * F[1] + 2.0 * bj[1] * bj[1] * (F[1] * F[1] + F[0] * F[2]);
        return std::tuple{u, P, arclength_jet(u, P, P1, P2)};
    };
    r.add(scan_margin("face_sec_radial", ts, [&](double t) { return warp_sec(std::get<2>(side(t))).radial; }));
    r.add(scan_margin("face_sec_tangential", ts, [&](double t) { return warp_sec(std::get<2>(side(t))).tangential; }));

    const double e0 = -f.eval(0.0, 1) / f(0.0);
    r.add(single_margin("inner_face_II_at_least_minus_nu", e0 + p.nu + kNonstrictSlack, 0.0));
    r.add(scan_margin("f_concave", ts, [&](double t) { return -f.eval(t, 2); }));
    add_all(r, fH_margins(fh, l1, grid), "f.");
    {
        const Jet F = f.jet(t0);
        r.add(single_margin("f_flat_at_t0", 1e-9 - std::max({std::abs(F[1]), std::abs(F[2]), std::abs(F[3])}), t0));
    }

    r.aux["theta"] = out.theta;
    r.aux["t0"] = t0;
    r.aux["delta_prime"] = delta_prime;
    r.aux["beta_b"] = beta_b;
    r.aux["kappa"] = kappa;

    // boundary
    {
        FaceProfile bottom{"bottom", p.n, FaceKind::warped_sphere, {}, {}, {}, {{"c2", "lo"}}};
        bottom.param = linspace(B.lo(), B.hi(), std::max(64, grid / 16));
        bottom.metric["warp"] = sample(bottom.param, [&](double s) { return B(s); });
        bottom.ii["radial"] = {e0};
        bottom.ii["sphere"] = {e0};
        bottom.end_jets["warp"] = J;
        r.boundary.faces.push_back(std::move(bottom));
    }
    {
        FaceProfile sf{"side", p.n, FaceKind::warped_sphere, {}, {}, {}, {{"c2", "lo"}}};
        sf.param = linspace(0.0, t_guard, std::max(64, grid / 16));
        std::vector<double> warp, speed, rad, sph;
        for (double t : sf.param) {
            const auto [u, P, us] = side(t);
            const Jet F = f.jet(t);
            const double bp = beta.eval(t, 1), bpp = beta.eval(t, 2);
            const double q = 1.0 + bp * bp * F[0] * F[0];
            // true eigenvalues: radial = beta''-form / q^{3/2}, sphere = sphere_sign / (f sqrt q)
            const double rad_num = -bp * bp * bp * F[1] * F[0] * F[0] - 2.0 * bp * F[1] - bpp * F[0];
            warp.push_back(u[0]);
            speed.push_back(std::sqrt(P));
            rad.push_back(-rad_num / std::pow(q, 1.5));
            sph.push_back(sphere_sign(t) / (F[0] * std::sqrt(q)));
        }
        sf.metric["warp"] = warp;
        sf.metric["speed"] = speed;
        sf.ii["radial"] = rad;
        sf.ii["sphere"] = sph;
        r.boundary.faces.push_back(std::move(sf));
    }
    r.boundary.faces.push_back(FaceProfile{"top", p.n, FaceKind::warped_sphere, {t0}, {{"scale", {f(t0)}}},
                                           {{"all", {0.0}}}, {}, {{"scale", f.jet(t0)}}, "hi"});
    r.boundary.corners.push_back(Corner{"c2", {out.theta}, {"bottom", "side"}});

    r.sweeps.push_back(make_sweep("handle2_II", "t", tb,
                                  {{"bracket", bracket}, {"closed_form", closed}, {"sphere", sphere_sign},
                                   {"beta", [&](double t) { return beta(t); }}}));
    return out;
}

HandleAssembly assemble_handle(const Handle1Params& p1, Handle2Params p2, int grid) {
    HandleAssembly out;
    out.h1 = build_handle1(p1, grid);
    // handle2 sees the outer face scaled to f = 1 at the outer height
    const double R = 1.0 / out.h1.f_end;
    const SmoothCurve Bt = R * reparam(out.h1.B, 1.0 / R, 0.0);
    p2.n = p1.n;
    out.h2 = build_handle2(Bt, p2, grid);

    BlockReport& r = out.report;
    r.block = "handle";
    r.params = {{"handle1", out.h1.report.params}, {"handle2", out.h2.report.params}};
    add_all(r, out.h1.report.margins, "h1.");
    add_all(r, out.h2.report.margins, "h2.");

    const GluingVerdict v = check_corner_gluing(out.h2.report.boundary, "bottom", out.h1.report.boundary, "outer", R);
    add_all(r, v.margins, "glue.");
    for (const auto& fl : v.flags) r.notes.push_back("flag: " + fl);
    for (const auto& n : v.notes) r.notes.push_back(n);

    const BoundaryProfile b1 = rescaled(out.h1.report.boundary, R);
    double dev = 0.0;
    for (double s : linspace(Bt.lo(), Bt.hi(), std::max(64, grid / 16)))
        dev = std::max(dev, std::abs(Bt(s) - R * out.h1.B(s / R)));
    r.add(single_margin("matched_boundary_curves", 1e-9 - dev, 0.0));

    const FaceProfile* cap = b1.face("cap");
    Margin cap_ii{"cap_II_nonnegative"};
    for (const auto& [fam, vals] : cap->ii)
        for (std::size_t i = 0; i < vals.size(); ++i) cap_ii.update(vals[i] + kNonstrictSlack, cap->param[i]);
    r.add(cap_ii);

    r.boundary.faces.push_back(*b1.face("inner"));
    r.boundary.faces.push_back(*cap);
    r.boundary.faces.push_back(*out.h2.report.boundary.face("side"));
    FaceProfile collar = *out.h2.report.boundary.face("top");
    collar.id = "collar";
    r.boundary.faces.push_back(collar);
    r.boundary.corners.push_back(Corner{"c12", {out.h1.theta + out.h2.theta}, {"cap", "side"}});
    r.aux["theta1"] = out.h1.theta;
    r.aux["theta2"] = out.h2.theta;
    r.aux["theta"] = out.h1.theta + out.h2.theta;
    r.aux["rescale"] = R;
    r.aux["t0"] = out.h2.report.aux.at("t0");
    for (auto& s : out.h1.report.sweeps) r.sweeps.push_back(s);
    for (auto& s : out.h2.report.sweeps) r.sweeps.push_back(s);
    return out;
}

BlockReport build_handle_bundle(const HandleBundleParams& p, int grid) {
    require(p.fibre_dim >= 1, "handle_bundle: fibre_dim >= 1");
    require(p.r > 0.0, "handle_bundle: r > 0");
    const HandleAssembly h = assemble_handle(p.handle1, p.handle2, grid);
    const double S = 1.0 / h.report.boundary.face("inner")->metric.at("scale").at(0);
    const BoundaryProfile b = rescaled(h.report.boundary, S);

    BlockReport r;
    r.block = "handle_bundle";
    r.params = {{"handle1", h.h1.report.params}, {"handle2", h.h2.report.params}, {"fibre_dim", p.fibre_dim}, {"r", p.r}};
    r.margins = h.report.margins;
    r.notes = h.report.notes;
    r.aux = h.report.aux;

    const int dim = p.handle1.n + p.fibre_dim;
    const FaceProfile& inner = *b.face("inner");
    r.boundary.faces.push_back(FaceProfile{"bottom", dim, FaceKind::bundle_over_base, {0.0},
                                           {{"base", {1.0}}, {"fibre", {p.r}}},
                                           {{"horizontal", inner.ii.at("all")}, {"vertical", {0.0}}}});
    r.boundary.faces.push_back(*b.face("cap"));
    const FaceProfile& top = *b.face("collar");
    const Jet fj = top.end_jets.at("scale");
    r.boundary.faces.push_back(FaceProfile{"collar", dim, FaceKind::bundle_over_base, top.param,
                                           {{"base", {fj[0]}}, {"fibre", {p.r}}},
                                           {{"horizontal", {fj[1] / fj[0]}}, {"vertical", {0.0}}},
                                           {},
                                           {{"base", fj}, {"fibre", Jet{p.r, 0.0, 0.0, 0.0}}},
                                           "hi"});
    r.aux["base_scale"] = S;
    r.aux["collar_base"] = fj[0];
    r.aux["lambda"] = -inner.ii.at("all").at(0);
    r.aux["r"] = p.r;
    r.sweeps = h.report.sweeps;
    return r;
}

// ---- transfer ---------------------------------------------------------------------

BlockReport build_transfer_block(const TransferParams& p, int grid) {
    require(p.p >= 2 && p.q >= 2, "transfer: p, q >= 2");
    require(p.lambda > 0.0 && p.lambda < 1.0, "transfer: lambda in (0,1)");
    require(p.a > 0.0 && p.C >= 0.0 && p.r0 > 0.0, "transfer: a, r0 > 0 and C >= 0");
    require(p.nu >= 0.0, "transfer: nu >= 0");
    require(p.time_axis == "t" || p.time_axis == "log", "transfer: time_axis is t or log");
    const bool log_axis = p.time_axis == "log";
    const TransferODE ode = log_axis ? integrate_transfer_odes_log(p.C, p.t_max, p.step_budget)
                                     : integrate_transfer_odes(p.C, p.t_max, p.step_budget);
    auto to_t = [log_axis](double x) { return log_axis ? std::expm1(x) : x; };
    const double x_max = log_axis ? std::log1p(p.t_max) : p.t_max;
    const double h00 = ode.h0(0.0);
    const double c = p.r0 / h00;
    const double sf = p.a / c;
    auto slope_gap = [&](double t) { return sf * ode.fC.eval(t, 1) - p.lambda; };
    if (!(slope_gap(p.t_max) > 0.0)) {
        std::ostringstream msg;
        msg << "transfer: f' never reaches lambda within the integration horizon t_max = " << p.t_max;
        throw BlockError(msg.str());
    }
    double lo = 0.0, hi = x_max;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * x_max; ++i) {
        const double mid = 0.5 * (lo + hi);
        (slope_gap(to_t(mid)) > 0.0 ? hi : lo) = mid;
        if (slope_gap(to_t(hi)) < 1e-10 && hi - lo < 1e-12) break;
    }
    const double t0 = to_t(hi);

    BundleWarpedMetric m;
    m.p = p.p;
    m.q = p.q;
    m.f = sf * ode.fC;
    m.h = p.a * ode.h0;
    m.ricci_base_lb = p.ricci_base_lb;
    m.ricci_fibre_lb = p.ricci_fibre_lb;
    m.a = p.a_bounds;

    BlockReport r;
    r.block = "transfer";
    r.params = {{"p", p.p},
                {"q", p.q},
                {"r0", p.r0},
                {"nu", p.nu},
                {"lambda", p.lambda},
                {"a", p.a},
                {"C", p.C},
                {"a_bounds", {{"sup_AX2", p.a_bounds.sup_AX2}, {"sup_AV2", p.a_bounds.sup_AV2},
                              {"sup_deltaA", p.a_bounds.sup_deltaA}}},
                {"ricci_base_lb", p.ricci_base_lb},
                {"ricci_fibre_lb", p.ricci_fibre_lb},
                {"t_max", p.t_max},
                {"step_budget", p.step_budget},
                {"time_axis", p.time_axis}};
    std::vector<double> ts = linspace(0.0, log_axis ? std::log1p(t0) : t0, grid);
    for (auto& t : ts) t = to_t(t);
    ts.back() = t0;
    std::vector<CurvaturePoint> pts;
    pts.reserve(ts.size());
    for (double t : ts) pts.push_back(bundle_warped_ricci(m, t));
    for (const std::string label : {"Ric(dt,dt)", "Ric(X,X)_lb", "Ric(V,V)_lb"}) {
        Margin mg{label};
        for (const auto& pt : pts) mg.update(pt.at(label), pt.t);
        r.add(mg);
    }
    Margin mixed{"mixed_dominated"};
    for (const auto& pt : pts)
        mixed.update(std::min(pt.at("Ric(X,X)_lb"), pt.at("Ric(V,V)_lb")) - pt.at("|Ric(X,V)|_ub"), pt.t);
    r.add(mixed);

    const double v0 = p.a * ode.h0.eval(0.0, 1) / p.r0;
    const double h0t = ode.h0(t0), dh0t = ode.h0.eval(t0, 1);
    const double R = ode.fC(t0);
    const double r1 = c * h0t / R;
    const double v1 = p.a * dh0t / (c * h0t);
    const double fprime = sf * ode.fC.eval(t0, 1);
    r.add(single_margin("II_vertical_at_0_at_least_minus_nu", p.nu - v0 + kNonstrictSlack, 0.0));
    r.add(single_margin("II_vertical_at_t0_nonnegative", v1 + kNonstrictSlack, t0));
    // II(X,X) = f' f = f' R on the t0 face, compared with lambda R
    r.add(single_margin("II_horizontal_at_t0_at_least_lambda_R", fprime - p.lambda + kNonstrictSlack, t0));

    r.aux["t0"] = t0;
    r.aux["t0_rescaled"] = t0 / sf;
    r.aux["r1"] = r1;
    r.aux["R"] = R;
    r.aux["c"] = c;
    r.aux["f_prime_t0"] = fprime;

    const int dim = p.p + p.q;
    r.boundary.faces.push_back(FaceProfile{"bottom", dim, FaceKind::bundle_over_base, {0.0},
                                           {{"base", {1.0}}, {"fibre", {p.r0}}},
                                           {{"vertical", {-v0}}, {"horizontal", {0.0}}}});
    r.boundary.faces.push_back(FaceProfile{"top", dim, FaceKind::bundle_over_base, {t0},
                                           {{"base", {R}}, {"fibre", {c * h0t}}},
                                           {{"vertical", {v1}}, {"horizontal", {p.lambda / R}}}});
    r.sweeps.push_back(make_sweep("transfer_ricci", "t", ts,
                                  {{"Ric(dt,dt)", [&](double t) { return bundle_warped_ricci(m, t).at("Ric(dt,dt)"); }},
                                   {"Ric(X,X)_lb", [&](double t) { return bundle_warped_ricci(m, t).at("Ric(X,X)_lb"); }},
                                   {"Ric(V,V)_lb", [&](double t) { return bundle_warped_ricci(m, t).at("Ric(V,V)_lb"); }},
                                   {"f", [&](double t) { return m.f(t); }},
                                   {"h", [&](double t) { return m.h(t); }}}));
    return r;
}

// ---- circle bundle ----------------------------------------------------------------

BlockReport build_s1_block(const S1Params& p, int grid) {
    require(p.q >= 2, "s1: q >= 2");
    require(p.lambda > 0.0 && p.lambda < 1.0, "s1: lambda in (0,1)");
    const int q = p.q;
    const double lb = p.ric_base_lb.value_or(q - 1.0);
    require(lb > 0.0, "s1: ric_base_lb > 0");
    const double lam = p.lambda;
    // f = rho + lam (1 - cos t), h = sin t on [0, pi/2]; Ricci at t = 0 needs q lam < rho < lb/(2 lam)
    const double lo = q * lam, hi = lb / (2.0 * lam);
    const double rho = lo < hi ? 0.5 * (lo + hi) : 1.1 * lo;
    const double t0 = kPi / 2;
    const Interval dom{0.0, t0};
    const SmoothCurve f = shifted(cosine(-lam, 1.0, 0.0, dom), rho + lam);
    const SmoothCurve h = sine(1.0, 1.0, 0.0, dom);

    BundleWarpedMetric bm;
    bm.p = 1;
    bm.q = q;
    bm.f = f;
    bm.h = h;
    bm.ricci_base_lb = lb / (q - 1.0);
    DoublyWarpedMetric dw{q, 1, f, h, {0.0}};
    auto ricci = [&](double t) {
        std::array<double, 3> v;
        if (t <= 0.0) {
            const CurvaturePoint c = doubly_warped_curvature(dw, t);
            v = {c.at("Ric(dt,dt)"), c.at("Ric(u,u)") + (lb - (q - 1.0)) / (rho * rho), c.at("Ric(v,v)")};
        } else {
            const CurvaturePoint c = bundle_warped_ricci(bm, t);
            v = {c.at("Ric(dt,dt)"), c.at("Ric(X,X)_lb"), c.at("Ric(V,V)_lb")};
        }
        return v;
    };

    BlockReport r;
    r.block = "s1";
    r.params = {{"q", q}, {"lambda", lam}, {"ric_base_lb", lb}};
    const auto ts = linspace(0.0, t0, grid);
    const char* labels[] = {"Ric(dt,dt)", "Ric(X,X)", "Ric(V,V)"};
    std::vector<Margin> ms{Margin{labels[0]}, Margin{labels[1]}, Margin{labels[2]}};
    for (double t : ts) {
        const auto v = ricci(t);
        for (int i = 0; i < 3; ++i) ms[i].update(v[i], t);
    }
    add_all(r, ms);
    const double ft = f(t0);
    r.add(single_margin("II_horizontal_at_least_lambda", f.eval(t0, 1) - lam + kNonstrictSlack, t0));
    r.add(single_margin("II_circle_nonnegative", h.eval(t0, 1) / h(t0) * ft + kNonstrictSlack, t0));
    r.add(parity_check("h_parity_at_0", h, 0.0, Parity::odd, 1.0));
    r.add(parity_check("f_parity_at_0", f, 0.0, Parity::even));
    r.add(scan_margin("h_concave", std::vector<double>(ts.begin() + 1, ts.end()), [&](double t) { return -h.eval(t, 2); }));
    r.aux["rho"] = rho;
    r.aux["t0"] = t0;
    r.aux["base_factor"] = ft / ft;
    r.aux["R"] = h(t0) / ft;
    r.boundary.faces.push_back(FaceProfile{"top", q, FaceKind::bundle_over_base, {t0},
                                           {{"base", {1.0}}, {"fibre", {h(t0) / ft}}},
                                           {{"horizontal", {f.eval(t0, 1)}}, {"vertical", {0.0}}}});
    r.sweeps.push_back(make_sweep("s1_ricci", "t", ts,
                                  {{"Ric(dt,dt)", [&](double t) { return ricci(t)[0]; }},
                                   {"Ric(X,X)", [&](double t) { return ricci(t)[1]; }},
                                   {"Ric(V,V)", [&](double t) { return ricci(t)[2]; }}}));
    return r;
}

// ---- fibre disc ---------------------------------------------------------------------

FibreDiscResult build_fibre_disc_warp(const FibreDiscParams& p, int grid) {
    require(p.p >= 2, "fibre_disc: p >= 2");
    const double t0 = p.t0;
    if (!(t0 > 1.0)) throw BlockError("fibre_disc: t0 must exceed 1 for a concave h with h'(0) = 1 to reach 1");
    // h' = cos(w t) (1 - S(t/t0)^m): sin(w t0)/w is the m -> infinity value of h(t0)
    const double target = 1.0 + 0.5 * (t0 - 1.0);
    auto reach = [t0](double w) { return w == 0.0 ? t0 : std::sin(w * t0) / w; };
    double w = kPi / (2.0 * t0);
    if (reach(w) < target) w = bisect([&](double x) { return reach(x) - target; }, 0.0, w, 200);

    auto dh = [t0, w](double m) {
        return [t0, w, m](double t) -> Jet {
            const Jet S = smooth_step(t / t0);
            const double c = std::cos(w * t), sn = std::sin(w * t);
            double keep = 1.0, d1 = 0.0, d2 = 0.0;  // 1 - S^m and the t-derivatives of S^m
            if (S[0] > 0.0) {
                const double Sm = std::pow(S[0], m);
                keep = -std::expm1(m * std::log1p(-smooth_step(1.0 - t / t0)[0]));
                if (S[0] >= 1.0) keep = 0.0;
                const double r1 = S[1] / S[0], r2 = S[2] / S[0];
                d1 = m * Sm * r1 / t0;
                d2 = Sm * (m * (m - 1.0) * r1 * r1 + m * r2) / (t0 * t0);
            }
            return Jet{c * keep, -w * sn * keep - c * d1, -w * w * c * keep + 2.0 * w * sn * d1 - c * d2, 0.0};
        };
    };
    auto total = [&](double m) {
        auto g = dh(m);
        return Antiderivative([g](double t) { return g(t)[0]; }, 0.0, t0, 256).total();
    };
    // total(m) increases from 0 to reach(w) > 1
    const double lm = bisect([&](double x) { return total(std::exp(x)) - 1.0; }, std::log(1e-8), std::log(1e8), 200);
    const double m = std::exp(lm);
    auto g = dh(m);
    auto H = std::make_shared<Antiderivative>([g](double t) { return g(t)[0]; }, 0.0, t0, 512);
    const double ht0 = H->total();
    FibreDiscResult out;
    out.h = SmoothCurve(
        Interval{0.0, t0},
        [g, H](double t) {
            const Jet d = g(t);
            return Jet{(*H)(t), d[0], d[1], d[2]};
        },
        Provenance::blended);
    const SmoothCurve& h = out.h;

    BlockReport& r = out.report;
    r.block = "fibre_disc";
    r.params = {{"p", p.p}, {"t0", t0}, {"q", p.q}, {"r", p.r}, {"R", p.R}};
    const auto ts = linspace(0.0, t0 * (1.0 - kFlatEndGuard), grid);
    auto sec = [&](double t) {
        const Jet j = h.jet(t);
        if (t <= 0.0) return WarpSec{-j[3] / j[1], -j[3] / j[1]};
        return warp_sec(j);
    };
    r.add(scan_margin("sec_radial", ts, [&](double t) { return sec(t).radial; }));
    if (p.p > 2) r.add(scan_margin("sec_tangential", ts, [&](double t) { return sec(t).tangential; }));
    r.add(scan_margin("h_concave", std::vector<double>(ts.begin() + 1, ts.end()), [&](double t) { return -h.eval(t, 2); }));
    r.add(single_margin("h_at_t0_is_one", 1e-9 - std::abs(ht0 - 1.0), t0));
    {
        const Jet j = h.jet(t0);
        r.add(single_margin("h_flat_at_t0", 1e-9 - std::max({std::abs(j[1]), std::abs(j[2]), std::abs(j[3])}), t0));
    }
    r.add(parity_check("h_parity_at_0", h, 0.0, Parity::odd, 1.0));
    r.aux["omega"] = w;
    r.aux["m"] = m;
    {
        const Jet j = h.jet(t0);
        const double sr = p.r;
        r.boundary.faces.push_back(FaceProfile{"collar", p.q + p.p - 1, FaceKind::bundle_over_base, {sr * t0},
                                               {{"base", {p.R}}, {"fibre", {sr * j[0]}}},
                                               {{"horizontal", {0.0}}, {"vertical", {j[1] / (sr * j[0])}}},
                                               {},
                                               {{"base", Jet{p.R, 0.0, 0.0, 0.0}},
                                                {"fibre", Jet{sr * j[0], j[1], j[2] / sr, j[3] / (sr * sr)}}},
                                               "hi"});
    }
    r.aux["t0"] = t0;
    r.boundary.faces.push_back(FaceProfile{"top", p.p - 1, FaceKind::warped_sphere, {t0}, {{"warp", {ht0}}},
                                           {{"sphere", {0.0}}}, {}, {{"warp", h.jet(t0)}}, "hi"});
    r.sweeps.push_back(make_sweep("fibre_disc_sec", "t", ts,
                                  {{"sec_radial", [&](double t) { return sec(t).radial; }},
                                   {"sec_tangential", [&](double t) { return sec(t).tangential; }},
                                   {"h", [&](double t) { return h(t); }}}));
    return out;
}

// ---- doubly warped sphere -----------------------------------------------------

BlockReport build_sphere_transition(const SmoothCurve& A, const SmoothCurve& B, int p, int q, int grid) {
    require(p >= 1 && q >= 1, "sphere_transition: p, q >= 1");
    const double s0 = A.hi();
    require(A.lo() == 0.0 && B.lo() == 0.0 && std::abs(B.hi() - s0) < 1e-12, "sphere_transition: A, B on [0, s0]");
    BlockReport r;
    r.block = "sphere_transition";
    r.params = {{"p", p}, {"q", q}, {"s0", s0}};
    r.add(parity_check("A_parity_at_0", A, 0.0, Parity::odd, 1.0));
    r.add(parity_check("B_parity_at_0", B, 0.0, Parity::even));
    r.add(parity_check("A_parity_at_s0", A, s0, Parity::even));
    r.add(parity_check("B_parity_at_s0", B, s0, Parity::odd, -1.0));
    add_all(r, sphere_positivity_margins(DoublyWarpedMetric{p, q, A, B, {0.0, s0}}, grid));
    const Interval dom{0.0, s0};
    const double k = kPi / (2.0 * s0), amp = 1.0 / k;
    const SmoothCurve Ar = sine(amp, k, 0.0, dom), Br = cosine(amp, k, 0.0, dom);
    for (double tau : {0.25, 0.5, 0.75}) {
        std::ostringstream tag;
        tag << "@path=" << tau;
        auto ms = sphere_positivity_margins(DoublyWarpedMetric{p, q, lerp(A, Ar, tau), lerp(B, Br, tau), {0.0, s0}}, grid);
        for (auto& m : ms) m.label += tag.str();
        add_all(r, ms);
    }
    const auto ts = linspace(0.0, s0, grid);
    r.sweeps.push_back(make_sweep("sphere_transition", "s", ts,
                                  {{"A", [&](double s) { return A(s); }},
                                   {"B", [&](double s) { return B(s); }},
                                   {"A''", [&](double s) { return A.eval(s, 2); }},
                                   {"B''", [&](double s) { return B.eval(s, 2); }}}));
    return r;
}

// ---- cohomogeneity one ------------------------------------------------------------

namespace {

SmoothCurve f0_curve() { return cosine(2.0 / kPi, kPi / 2, 0.0, {-1.0, 1.0}); }

void add_ricci_scan(BlockReport& r, const CohomOneMetric& m, CohomFamily fam, const std::vector<double>& ts,
                    const std::string& suffix) {
    const char* labels[] = {"Ric(dt,dt)", "Ric(V,V)", "Ric(X,X)"};
    std::vector<Margin> ms;
    for (const char* l : labels) ms.push_back(Margin{std::string(l) + suffix});
    for (double t : ts) {
        const CurvaturePoint c = cohomog1_ricci(m, t, fam);
        for (int i = 0; i < 3; ++i) ms[i].update(c.at(labels[i]), t);
    }
    add_all(r, ms);
}

bool valid_projective(int d, int n) {
    if (d == 1 || d == 2) return n >= 2;
    if (d == 4) return n >= 2;
    if (d == 8) return n == 2;
    return false;
}

}  // namespace

BlockReport projective_family_check(const ProjectiveParams& p, int grid) {
    require(valid_projective(p.d, p.n), "projective: (d, n) is not a projective datum");
    require(p.s >= 0.0 && p.s <= 1.0, "projective: s in [0,1]");
    const double s = p.s;
    const double om = (kPi / 4) * (s + 1.0);
    const double tstar = (1.0 - s) / (1.0 + s);
    const SmoothCurve f0 = f0_curve();
    const SmoothCurve ht = sine(1.0 / om, om, om, {-1.0, 1.0});  // before flattening
    SmoothCurve h;
    if (s == 0.0) {
        h = ht;
    } else {
        if (!(tstar - p.width > -1.0 && p.width > 0.0))
            throw BandInfeasible("projective: flattening window leaves [-1, 1]", p.width);
        h = flatten_at(ht, tstar, p.width, 1.0);
    }
    CohomOneMetric m{p.d, p.n, f0, h};

    BlockReport r;
    r.block = "projective";
    r.params = {{"d", p.d}, {"n", p.n}, {"s", s}, {"width", p.width}};
    std::vector<double> ts = linspace(-1.0, 1.0, grid);
    if (s > 0.0) {
        // the flat point t* itself is kept; only its underflow neighbourhood is dropped
        std::vector<double> kept;
        for (double t : ts)
            if (!(t < tstar && t > tstar - kFlatEndGuard * p.width)) kept.push_back(t);
        ts.swap(kept);
    }
    add_ricci_scan(r, m, CohomFamily::projective, ts, "");
    for (double e : {-1.0, 1.0}) {
        const CurvaturePoint c = cohomog1_ricci(m, e, CohomFamily::projective);
        double lo = kInf;
        for (const auto& [l, v] : c.entries) lo = std::min(lo, v);
        r.add(single_margin(e < 0 ? "endpoint_ricci_at_-1" : "endpoint_ricci_at_+1", lo, e));
    }

    const auto tk = linspace(-1.0, tstar, grid);
    r.add(scan_margin("key_inequality", tk, [&](double t) {
        if (t <= -1.0) return om * om + kNonstrictSlack;  // limit -h'''(-1)
        const Jet F = f0.jet(t), Hh = ht.jet(t);
        const double h2 = Hh[0] * Hh[0];
        return F[0] * F[0] / (h2 * h2) - F[1] * Hh[1] / (F[0] * Hh[0]) + kNonstrictSlack;
    }));
    r.add(scan_margin("trig_sin_bound", tk, [&](double t) {
        const double a0 = (kPi / 4) * (t + 1.0);
        return (1.0 + s) * std::sin(a0) - std::sin((1.0 + s) * a0) + kNonstrictSlack;
    }));
    r.add(scan_margin("trig_cos_bound", tk, [&](double t) {
        const double a0 = (kPi / 4) * (t + 1.0);
        return std::cos(a0) - std::cos((1.0 + s) * a0) + kNonstrictSlack;
    }));
    if (s == 1.0) {
        double dev = 0.0;
        for (double t : linspace(-1.0, -p.width, grid)) dev = std::max(dev, std::abs(h(t) - f0(t)));
        r.aux["hemisphere_deviation"] = dev;
    }
    r.aux["t_star"] = tstar;
    r.sweeps.push_back(make_sweep(
        "projective_ricci", "t", ts,
        {{"Ric(dt,dt)", [&](double t) { return cohomog1_ricci(m, t, CohomFamily::projective).at("Ric(dt,dt)"); }},
         {"Ric(V,V)", [&](double t) { return cohomog1_ricci(m, t, CohomFamily::projective).at("Ric(V,V)"); }},
         {"Ric(X,X)", [&](double t) { return cohomog1_ricci(m, t, CohomFamily::projective).at("Ric(X,X)"); }},
         {"h", [&](double t) { return h(t); }}}));
    return r;
}

namespace {

// h0 - g with g'' = (h0 - f0)'' cut off after eps, a flat negative plateau and a closing bump;
// the plateau depth and bump height make g and g' vanish at eps'
SmoothCurve wu_blend(double e, double ep) {
    const double span = ep - 2.0 * e;
    if (!(span > 0.0)) throw BlockError("wu: blend infeasible: eps' must exceed 2 eps");
    const double ramp = 0.1 * span, close = 0.25 * span;
    const double m = 2.0 * e, m2 = ep - close;
    auto base = [e](double t) -> std::array<double, 2> {
        const Jet S = smooth_step((t - e) / e);
        const double c = std::cos(kPi * t / 2), sn = std::sin(kPi * t / 2);
        return {kPi / 2 * c * (1.0 - S[0]), -kPi * kPi / 4 * sn * (1.0 - S[0]) - kPi / 2 * c * S[1] / e};
    };
    auto plateau = [=](double t) -> std::array<double, 2> {
        const Jet a = smooth_step((t - m) / ramp), b = smooth_step((t - (m2 - ramp)) / ramp);
        return {a[0] * (1.0 - b[0]), a[1] / ramp * (1.0 - b[0]) - a[0] * b[1] / ramp};
    };
    auto closing = [=](double t) -> std::array<double, 2> {
        const Jet b = bump(2.0 * (t - m2) / close - 1.0);
        return {b[0], b[1] * 2.0 / close};
    };
    auto integral = [ep](const std::function<double(double)>& g) { return Antiderivative(g, 0.0, ep, 512).total(); };
    const double Ib = integral([&](double t) { return base(t)[0]; });
    const double Itb = integral([&](double t) { return t * base(t)[0]; });
    const double Ip = integral([&](double t) { return plateau(t)[0]; });
    const double Itp = integral([&](double t) { return t * plateau(t)[0]; });
    const double Ic = integral([&](double t) { return closing(t)[0]; });
    const double Itc = integral([&](double t) { return t * closing(t)[0]; });
    // -a Ip + c Ic = -Ib, -a Itp + c Itc = -Itb
    const double det = -Ip * Itc + Itp * Ic;
    const double a = (-Ib * Itc + Itb * Ic) / det;
    const double c = (-Ip * -Itb + Itp * -Ib) / det;
    auto phi = [=](double t) -> std::array<double, 2> {
        const auto b = base(t), pl = plateau(t), cl = closing(t);
        return {b[0] - a * pl[0] + c * cl[0], b[1] - a * pl[1] + c * cl[1]};
    };
    auto G1 = std::make_shared<Antiderivative>([phi](double t) { return phi(t)[0]; }, 0.0, ep, 1024);
    auto G2 = std::make_shared<Antiderivative>([phi](double t) { return t * phi(t)[0]; }, 0.0, ep, 1024);
    const double h0 = 2.0 / kPi;
    return SmoothCurve(
        Interval{-1.0, 1.0},
        [=](double t) {
            const double x = std::abs(t), sg = t < 0.0 ? -1.0 : 1.0;
            if (x >= ep) return Jet{h0, 0.0, 0.0, 0.0};
            const double g1 = (*G1)(x);
            const double g = x * g1 - (*G2)(x);
            const auto ph = phi(x);
            return Jet{h0 - g, -sg * g1, -ph[0], -sg * ph[1]};
        },
        Provenance::blended);
}

}  // namespace

BlockReport wu_family_check(const WuParams& p, int grid) {
    const SmoothCurve f0 = f0_curve();
    const SmoothCurve h0 = constant(2.0 / kPi, {-1.0, 1.0});
    const auto ts = linspace(-1.0, 1.0, grid);
    BlockReport r;
    r.block = "wu";
    if (p.variant == "g00") {
        r.params = {{"variant", "g00"}};
        const CohomOneMetric m{2, 2, f0, h0};
        add_ricci_scan(r, m, CohomFamily::wu, ts, "");
        const CurvaturePoint c = cohomog1_ricci(m, 0.0, CohomFamily::wu);
        r.aux["Ric(dt,dt)@0"] = c.at("Ric(dt,dt)");
        r.aux["Ric(V,V)@0"] = c.at("Ric(V,V)");
        r.aux["Ric(X,X)@0"] = c.at("Ric(X,X)");
        r.sweeps.push_back(make_sweep(
            "wu_ricci", "t", ts,
            {{"Ric(dt,dt)", [&](double t) { return cohomog1_ricci(m, t, CohomFamily::wu).at("Ric(dt,dt)"); }},
             {"Ric(V,V)", [&](double t) { return cohomog1_ricci(m, t, CohomFamily::wu).at("Ric(V,V)"); }},
             {"Ric(X,X)", [&](double t) { return cohomog1_ricci(m, t, CohomFamily::wu).at("Ric(X,X)"); }}}));
        return r;
    }
    require(p.variant == "blended", "wu: variant must be g00 or blended");
    const double e = p.eps, ep = p.eps_prime.value_or(kWuEpsPrime);
    require(e > 0.0 && ep > e && ep < 1.0, "wu: need 0 < eps < eps' < 1");
    r.params = {{"variant", "blended"}, {"eps", e}, {"eps_prime", ep}};
    // h1 = h0 - g. Ric(dt,dt) > 0 bounds g'' below by -(pi/2)^2 h / 2 >= -pi/4, so g needs
    // at least the length L to come back to rest from its values at eps.
    {
        const double k = kPi / 4, g0 = (2.0 / kPi) * (1.0 - std::cos(kPi * e / 2)), p1 = std::sin(kPi * e / 2);
        const double L = (p1 + std::sqrt(p1 * p1 + 2.0 * k * g0)) / k;
        if (!(e + L < ep)) {
            std::ostringstream msg;
            msg << "wu: blend infeasible: Ric(dt,dt) > 0 needs eps' > " << e + L << " for eps = " << e;
            throw BlockError(msg.str());
        }
        r.aux["min_blend_length"] = L;
    }
    const SmoothCurve h1 = wu_blend(e, ep);
    double dev = 0.0;
    for (double t : linspace(-e, e, grid)) dev = std::max(dev, std::abs(h1(t) - f0(t)));
    r.add(single_margin("blend_equals_f0_on_core", 1e-12 - dev, 0.0));
    for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        std::ostringstream tag;
        tag << "@s=" << s;
        add_ricci_scan(r, CohomOneMetric{2, 2, f0, lerp(h1, h0, s)}, CohomFamily::wu, ts, tag.str());
    }
    const CohomOneMetric m1{2, 2, f0, h1};
    r.sweeps.push_back(make_sweep(
        "wu_blended_ricci", "t", ts,
        {{"Ric(dt,dt)", [&](double t) { return cohomog1_ricci(m1, t, CohomFamily::wu).at("Ric(dt,dt)"); }},
         {"Ric(V,V)", [&](double t) { return cohomog1_ricci(m1, t, CohomFamily::wu).at("Ric(V,V)"); }},
         {"Ric(X,X)", [&](double t) { return cohomog1_ricci(m1, t, CohomFamily::wu).at("Ric(X,X)"); }},
         {"h", [&](double t) { return h1(t); }}}));
    return r;
}

// ---- registry ---------------------------------------------------------------------

namespace {

// pulls typed keys with defaults and rejects the ones never asked for
class ParamReader {
public:
    ParamReader(const std::string& block, const json& j) : block_(block), j_(j.is_null() ? json::object() : j) {
        if (!j_.is_object()) throw ParamError(block + ": params must be an object");
    }
    template <class T>
    T get(const std::string& key, T def) {
        seen_.insert(key);
        if (!j_.contains(key)) return def;
        return convert<T>(key);
    }
    template <class T>
    std::optional<T> opt(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null()) return std::nullopt;
        return convert<T>(key);
    }
    const json* sub(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }
    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ParamError(block_ + ": unknown parameter '" + k + "'");
    }

private:
    template <class T>
    T convert(const std::string& key) const {
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ParamError(block_ + ": parameter '" + key + "' has the wrong type");
        }
    }

    std::string block_;
    json j_;
    std::set<std::string> seen_;
};

Handle1Params read_h1(ParamReader& pr) {
    Handle1Params p;
    p.n = pr.get("n", p.n);
    p.K = pr.get("K", p.K);
    p.lambda1 = pr.get("lambda1", p.lambda1);
    p.lambda2 = pr.get("lambda2", p.lambda2);
    p.eps1 = pr.get("eps1", p.eps1);
    p.eps2 = pr.get("eps2", p.eps2);
    p.delta = pr.get("delta", p.delta);
    return p;
}

Handle2Params read_h2(ParamReader& pr) {
    Handle2Params p;
    p.n = pr.get("n", p.n);
    p.lambda1 = pr.get("lambda1", p.lambda1);
    p.lambda2 = pr.get("lambda2", p.lambda2);
    p.a = pr.get("a", p.a);
    p.b = pr.get("b", p.b);
    p.eps = pr.get("eps", p.eps);
    p.nu = pr.get("nu", p.nu);
    p.t0 = pr.opt<double>("t0");
    p.flatten_width = pr.get("flatten_width", p.flatten_width);
    p.fH_delta = pr.get("fH_delta", p.fH_delta);
    return p;
}

// sin(pi s / 2 s0)-type pair with a third-harmonic perturbation e
std::pair<SmoothCurve, SmoothCurve> harmonic_pair(double s0, double e) {
    const double k = kPi / (2.0 * s0), amp = 1.0 / k;
    const Interval dom{0.0, s0};
    SmoothCurve A = (1.0 + e) * sine(amp, k, 0.0, dom) - (e / 3.0) * sine(amp, 3.0 * k, 0.0, dom);
    SmoothCurve B = (1.0 + e) * cosine(amp, k, 0.0, dom) + (e / 3.0) * cosine(amp, 3.0 * k, 0.0, dom);
    return {A, B};
}

}  // namespace

std::vector<std::string> block_names() {
    return {"cone", "handle1",    "handle2",           "handle",     "handle_bundle", "transfer",
            "s1",   "fibre_disc", "sphere_transition", "projective", "wu"};
}

BlockReport run_block(const std::string& name, const json& params, int grid) {
    ParamReader pr(name, params);
    BlockReport out;
    if (name == "cone") {
        ConeParams p;
        p.n = pr.get("n", p.n);
        p.K = pr.get("K", p.K);
        p.eps1 = pr.get("eps1", p.eps1);
        p.eps2 = pr.get("eps2", p.eps2);
        p.delta = pr.get("delta", p.delta);
        p.t = pr.get("t", p.t);
        pr.finish();
        out = build_cone_metric(p, grid).report;
    } else if (name == "handle1") {
        const Handle1Params p = read_h1(pr);
        pr.finish();
        out = build_handle1(p, grid).report;
    } else if (name == "handle2") {
        Handle2Params p = read_h2(pr);
        const double rho = pr.get("B_rho", 1.2);
        pr.finish();
        // convex boundary of a geodesic ball of radius rho in the unit sphere
        const SmoothCurve B = sine(-1.0, 1.0, -rho, {0.0, 0.5 * rho});
        out = build_handle2(B, p, grid).report;
        out.params["B_rho"] = rho;
    } else if (name == "handle") {
        Handle1Params p1;
        Handle2Params p2;
        if (const json* j = pr.sub("handle1")) {
            ParamReader r1("handle.handle1", *j);
            p1 = read_h1(r1);
            r1.finish();
        }
        if (const json* j = pr.sub("handle2")) {
            ParamReader r2("handle.handle2", *j);
            p2 = read_h2(r2);
            r2.finish();
        }
        pr.finish();
        out = assemble_handle(p1, p2, grid).report;
    } else if (name == "handle_bundle") {
        HandleBundleParams p;
        if (const json* j = pr.sub("handle1")) {
            ParamReader r1("handle_bundle.handle1", *j);
            p.handle1 = read_h1(r1);
            r1.finish();
        }
        if (const json* j = pr.sub("handle2")) {
            ParamReader r2("handle_bundle.handle2", *j);
            p.handle2 = read_h2(r2);
            r2.finish();
        }
        p.fibre_dim = pr.get("fibre_dim", p.fibre_dim);
        p.r = pr.get("r", p.r);
        pr.finish();
        out = build_handle_bundle(p, grid);
    } else if (name == "transfer") {
        TransferParams p;
        p.p = pr.get("p", p.p);
        p.q = pr.get("q", p.q);
        p.r0 = pr.get("r0", p.r0);
        p.nu = pr.get("nu", p.nu);
        p.lambda = pr.get("lambda", p.lambda);
        p.a = pr.get("a", p.a);
        p.C = pr.get("C", p.C);
        if (const json* j = pr.sub("a_bounds")) {
            ParamReader ra("transfer.a_bounds", *j);
            p.a_bounds.sup_AX2 = ra.get("sup_AX2", 0.0);
            p.a_bounds.sup_AV2 = ra.get("sup_AV2", 0.0);
            p.a_bounds.sup_deltaA = ra.get("sup_deltaA", 0.0);
            ra.finish();
        }
        p.ricci_base_lb = pr.get("ricci_base_lb", p.ricci_base_lb);
        p.ricci_fibre_lb = pr.get("ricci_fibre_lb", p.ricci_fibre_lb);
        p.t_max = pr.get("t_max", p.t_max);
        p.step_budget = pr.get("step_budget", p.step_budget);
        p.time_axis = pr.get<std::string>("time_axis", p.time_axis);
        pr.finish();
        out = build_transfer_block(p, grid);
    } else if (name == "s1") {
        S1Params p;
        p.q = pr.get("q", p.q);
        p.lambda = pr.get("lambda", p.lambda);
        p.ric_base_lb = pr.opt<double>("ric_base_lb");
        pr.finish();
        out = build_s1_block(p, grid);
    } else if (name == "fibre_disc") {
        FibreDiscParams p;
        p.p = pr.get("p", p.p);
        p.t0 = pr.get("t0", p.t0);
        p.q = pr.get("q", p.q);
        p.r = pr.get("r", p.r);
        p.R = pr.get("R", p.R);
        pr.finish();
        require(p.r > 0.0 && p.R > 0.0, "fibre_disc: r, R > 0");
        out = build_fibre_disc_warp(p, grid).report;
    } else if (name == "sphere_transition") {
        const int p = pr.get("p", 2), q = pr.get("q", 2);
        const double s0 = pr.get("s0", kPi / 2), e = pr.get("e", 0.0);
        pr.finish();
        const auto [A, B] = harmonic_pair(s0, e);
        out = build_sphere_transition(A, B, p, q, grid);
        out.params["e"] = e;
    } else if (name == "projective") {
        ProjectiveParams p;
        p.d = pr.get("d", p.d);
        p.n = pr.get("n", p.n);
        p.s = pr.get("s", p.s);
        p.width = pr.get("width", p.width);
        pr.finish();
        out = projective_family_check(p, grid);
    } else if (name == "wu") {
        WuParams p;
        p.variant = pr.get<std::string>("variant", p.variant);
        p.eps = pr.get("eps", p.eps);
        p.eps_prime = pr.opt<double>("eps_prime");
        pr.finish();
        out = wu_family_check(p, grid);
    } else {
        throw ParamError("unknown block '" + name + "'");
    }
    return out;
}

}  // namespace rb
