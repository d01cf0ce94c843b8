#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "riccibench/curvature.hpp"
#include "riccibench/funcspace.hpp"

using namespace rb;

namespace {

DoublyWarpedMetric round_metric(int p, int q, double c = 1.0) {
    const Interval dom{0.0, c * M_PI / 2};
    return DoublyWarpedMetric{p, q, sine(c, 1.0 / c, 0.0, dom), cosine(c, 1.0 / c, 0.0, dom), {0.0, c * M_PI / 2}};
}

bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

// Ricci diagonal in the orthonormal frame (dt, u/f, v/h) from the chart computation
std::array<double, 3> fd_frame_ricci(const DoublyWarpedMetric& m, const Eigen::VectorXd& x) {
    const Eigen::MatrixXd Ric = fd_curvature_oracle(m, x);
    const Eigen::MatrixXd g = doubly_warped_chart(m)(x);
    return {Ric(0, 0), Ric(1, 1) / g(1, 1), Ric(1 + m.p, 1 + m.p) / g(1 + m.p, 1 + m.p)};
}

}  // namespace

TEST_CASE("doubly warped curvature on the round sphere") {
    const DoublyWarpedMetric m = round_metric(2, 2);
    const CurvaturePoint c = doubly_warped_curvature(m, 0.7);
    for (const char* l : {"sec(dt,u)", "sec(dt,v)", "sec(u,v)", "sec(u,u')", "sec(v,v')"})
        CHECK(std::abs(c.at(l) - 1.0) < 1e-9);
    CHECK(std::abs(c.at("Ric(dt,dt)") - 4.0) < 1e-9);

    const CurvaturePoint d = doubly_warped_curvature(round_metric(3, 4), 0.3);
    CHECK(std::abs(d.at("Ric(dt,dt)") - 7.0) < 1e-9);
    CHECK(std::abs(d.at("Ric(u,u)") - 7.0) < 1e-9);
    CHECK(std::abs(d.at("Ric(v,v)") - 7.0) < 1e-9);
    CHECK_THROWS_AS(d.at("nope"), std::out_of_range);
}

TEST_CASE("constant warps") {
    const Interval dom{0, 1};
    const DoublyWarpedMetric m{2, 3, constant(2.0, dom), constant(0.5, dom), {}};
    const CurvaturePoint c = doubly_warped_curvature(m, 0.4);
    CHECK(c.at("sec(dt,u)") == 0.0);
    CHECK(c.at("sec(dt,v)") == 0.0);
    CHECK(c.at("sec(u,v)") == 0.0);
    CHECK(c.at("sec(u,u')") == doctest::Approx(0.25));
    CHECK(c.at("sec(v,v')") == doctest::Approx(4.0));
    const IIProfile ii = slice_II(m, 0.4);
    CHECK(ii.at("p-sphere") == 0.0);
    CHECK(ii.at("q-sphere") == 0.0);
}

TEST_CASE("round sphere family has constant curvature 1/c^2 including endpoints") {
    for (double c : {0.5, 1.0, 2.3}) {
        const DoublyWarpedMetric m = round_metric(2, 3, c);
        for (double t : linspace(0.0, c * M_PI / 2, 257)) {
            const CurvaturePoint pt = doubly_warped_curvature(m, t);
            for (const char* l : {"sec(dt,u)", "sec(dt,v)", "sec(u,v)", "sec(u,u')", "sec(v,v')"}) {
                INFO(l << " t=" << t << " c=" << c);
                CHECK(std::abs(pt.at(l) - 1.0 / (c * c)) < 1e-8);
            }
        }
    }
}

TEST_CASE("undeclared collapse is rejected") {
    DoublyWarpedMetric m = round_metric(2, 2);
    m.collapse_points.clear();
    CHECK_THROWS_AS(doubly_warped_curvature(m, 0.0), UndeclaredCollapse);
    CHECK_NOTHROW(doubly_warped_curvature(m, 0.2));
    CHECK_THROWS_AS(slice_II(round_metric(2, 2), 0.0), std::domain_error);
}

TEST_CASE("collapse endpoint equals the extrapolated interior limit") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> a(-0.3, 0.3), b(0.05, 0.4);
    for (int trial = 0; trial < 10; ++trial) {
        const Interval dom{0.0, 1.0};
        const double c3 = a(rng), c2 = a(rng), c4 = b(rng);
        // f odd with f'(0)=1, h even and positive
        const SmoothCurve f = sine(1.0, 1.0, 0.0, dom) + SmoothCurve(dom, [c3](double t) {
                                  return Jet{c3 * t * t * t, 3 * c3 * t * t, 6 * c3 * t, 6 * c3};
                              });
        const SmoothCurve h(dom, [c2, c4](double t) {
            return Jet{1.0 + c2 * t * t + c4 * t * t * t * t, 2 * c2 * t + 4 * c4 * t * t * t, 2 * c2 + 12 * c4 * t * t,
                       24 * c4 * t};
        });
        const DoublyWarpedMetric m{2, 3, f, h, {0.0}};
        const CurvaturePoint end = doubly_warped_curvature(m, 0.0);
        const double e = 2e-3;
        const CurvaturePoint p1 = doubly_warped_curvature(m, e), p2 = doubly_warped_curvature(m, e / 2);
        for (const auto& [label, v] : end.entries) {
            const double extrap = (4.0 * p2.at(label) - p1.at(label)) / 3.0;
            INFO(label << " endpoint=" << v << " extrapolated=" << extrap);
            CHECK(std::abs(v - extrap) < 1e-5);
        }
    }
}

TEST_CASE("slice II") {
    const IIProfile ii = slice_II(round_metric(2, 2), M_PI / 4);
    CHECK(ii.at("p-sphere") == doctest::Approx(1.0));
    CHECK(ii.at("q-sphere") == doctest::Approx(-1.0));
    const IIProfile half = slice_II(scale_metric(round_metric(2, 2), 2.0), M_PI / 2);
    CHECK(half.at("p-sphere") == doctest::Approx(0.5));
    CHECK(half.at("q-sphere") == doctest::Approx(-0.5));
    CHECK_THROWS_AS(scale_metric(round_metric(1, 1), 0.0), std::invalid_argument);
}

TEST_CASE("slice II scales by 1/R under R^2 g") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> amp(0.1, 0.4), R(0.2, 5.0), tt(0.1, 0.9);
    for (int trial = 0; trial < 50; ++trial) {
        const Interval dom{0.0, 1.0};
        const DoublyWarpedMetric m{1, 2, shifted(sine(amp(rng), 2.0, 0.3, dom), 1.0),
                                   shifted(cosine(amp(rng), 1.5, 0.1, dom), 1.2), {}};
        const double r = R(rng), t = tt(rng);
        const IIProfile a = slice_II(m, t), b = slice_II(scale_metric(m, r), r * t);
        for (const auto& [fam, v] : a.eigen) CHECK(std::abs(b.at(fam) - v / r) <= 1e-12 * std::abs(v / r));
    }
}

TEST_CASE("graph II") {
    const Interval dom{-0.5, 3.0};
    const SmoothCurve f = affine(0.9, 1.0, dom);
    const SmoothCurve R = sine(1.0, 1.0, 0.0, Interval{0.01, 3.0});
    const SmoothCurve flat = constant(0.0, Interval{0.01, 3.0});
    const IIProfile a = graph_II(f, R, flat, 0.7);
    CHECK(a.at("radial") == doctest::Approx(0.9));
    CHECK(a.at("sphere") == doctest::Approx(0.9));
    CHECK(a.at("mixed") == 0.0);
    CHECK(graph_II(f, R, flat, 0.7, Orientation::down).at("radial") == doctest::Approx(-0.9));

    // alpha(eps1)=0, alpha'(eps1)=0, alpha''(eps1)=lambda1
    const double l1 = 0.9, e1 = 0.05;
    const SmoothCurve alpha(Interval{0.01, 3.0}, [=](double s) {
        const double u = s - e1;
        return Jet{0.5 * l1 * u * u, l1 * u, l1, 0.0};
    });
    CHECK(std::abs(graph_II(f, R, alpha, e1).at("radial")) < 1e-15);
    FHParams p;
    p.lambda1 = 0.9;
    p.lambda2 = 0.95;
    const FHCurve fh = make_fH(p);
    CHECK(graph_II(fh.f, R, alpha, e1).at("radial") == doctest::Approx(0.95 - 0.9));
}

TEST_CASE("bundle warped Ricci") {
    const Interval dom{0.0, 1.0};
    const SmoothCurve w = shifted(sine(0.2, 1.0, 0.5, dom), 1.0);
    SUBCASE("trivial bundle reduces to the doubly warped diagonal") {
        BundleWarpedMetric b{2, 3, w, w * shifted(sine(0.1, 2.0, 0.0, dom), 1.0), 1.0, 1.0, {}};
        const DoublyWarpedMetric d{b.q, b.p, b.f, b.h, {}};
        for (double t : {0.2, 0.5, 0.8}) {
            const CurvaturePoint x = bundle_warped_ricci(b, t), y = doubly_warped_curvature(d, t);
            CHECK(x.at("Ric(dt,dt)") == doctest::Approx(y.at("Ric(dt,dt)")));
            CHECK(x.at("Ric(X,X)_lb") == doctest::Approx(y.at("Ric(u,u)")));
            CHECK(x.at("Ric(V,V)_lb") == doctest::Approx(y.at("Ric(v,v)")));
            CHECK(x.at("|Ric(X,V)|_ub") == 0.0);
        }
    }
    SUBCASE("constant warps") {
        const double r = 0.3;
        BundleWarpedMetric b{2, 3, constant(1.0, dom), constant(r, dom), 1.0, 1.5, {}};
        CHECK(bundle_warped_ricci(b, 0.4).at("Ric(V,V)_lb") == doctest::Approx(1.5 / (r * r)));
    }
    SUBCASE("A-tensor bounds enter with their signs") {
        BundleWarpedMetric b{2, 2, w, 0.5 * w, 1.0, 1.0, {0.3, 0.7, 0.2}};
        BundleWarpedMetric t = b;
        t.a = {};
        const double f = w(0.4), h = 0.5 * f;
        const CurvaturePoint x = bundle_warped_ricci(b, 0.4), y = bundle_warped_ricci(t, 0.4);
        CHECK(x.at("Ric(X,X)_lb") == doctest::Approx(y.at("Ric(X,X)_lb") - 2 * h * h / std::pow(f, 4) * 0.3));
        CHECK(x.at("Ric(V,V)_lb") == doctest::Approx(y.at("Ric(V,V)_lb")));
        CHECK(x.at("|Ric(X,V)|_ub") == doctest::Approx(h / std::pow(f, 3) * 0.2));
    }
}

TEST_CASE("submersion shrink bounds") {
    const ShrinkBounds z = submersion_shrink_bounds(1.0, 1.0, {}, 3.0);
    REQUIRE(z.r_star);
    CHECK(std::isinf(*z.r_star));
    CHECK(z.bounds.at("Ric(X,X)_lb") > 0.0);

    const ShrinkBounds s = submersion_shrink_bounds(1.0, 1.0, {2.0, 0.0, 0.5}, 0.4);
    REQUIRE(s.r_star);
    CHECK(*s.r_star == doctest::Approx(0.5));
    CHECK(s.bounds.at("Ric(X,X)_lb") == doctest::Approx(1.0 - 4.0 * 0.16));
    CHECK(submersion_shrink_bounds(1.0, 1.0, {2.0, 0.0, 0.5}, 0.51).bounds.at("Ric(X,X)_lb") < 0.0);
    CHECK(submersion_shrink_bounds(1.0, 1.0, {2.0, 0.0, 0.5}, 1e-4).bounds.at("|Ric(U,X)|_ub") < 1e-8);
    CHECK_FALSE(submersion_shrink_bounds(-1.0, 1.0, {}, 0.3).r_star);
}

TEST_CASE("cohomogeneity one Ricci") {
    const Interval dom{-1.0, 1.0};
    const CohomOneMetric wu{2, 2, cosine(2 / M_PI, M_PI / 2, 0.0, dom), constant(2 / M_PI, dom)};
    const CurvaturePoint w = cohomog1_ricci(wu, 0.0, CohomFamily::wu);
    const double q = M_PI / 2;
    CHECK(w.at("Ric(dt,dt)") == doctest::Approx(q * q));
    CHECK(w.at("Ric(V,V)") == doctest::Approx(3 * q * q));
    CHECK(w.at("Ric(X,X)") == doctest::Approx(M_PI * M_PI / 2));
    const CurvaturePoint p = cohomog1_ricci(wu, 0.0, CohomFamily::projective);
    for (const auto& [l, v] : w.entries) CHECK(p.at(l) == doctest::Approx(v));
    // f vanishes at t=1 with f'(1) = -1
    const CurvaturePoint e = cohomog1_ricci(wu, 1.0, CohomFamily::wu);
    const CurvaturePoint near = cohomog1_ricci(wu, 1.0 - 1e-4, CohomFamily::wu);
    for (const auto& [l, v] : e.entries) CHECK(v == doctest::Approx(near.at(l)).epsilon(1e-5));
}

TEST_CASE("cohomogeneity one against the doubly warped term structure") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> amp(0.05, 0.3), fr(0.5, 2.0);
    const Interval dom{-0.8, 0.8};
    for (int d : {2, 4, 8}) {
        const int n = d == 8 ? 2 : 3;
        const int k = (n - 1) * d;
        for (int trial = 0; trial < 5; ++trial) {
            const SmoothCurve f = shifted(sine(amp(rng), fr(rng), 0.2, dom), 1.0);
            const SmoothCurve h = shifted(cosine(amp(rng), fr(rng), 0.1, dom), 1.1);
            const CohomOneMetric c{d, n, f, h};
            const DoublyWarpedMetric dw{d - 1, k, f, h, {}};
            for (double t : {-0.5, 0.1, 0.6}) {
                const CurvaturePoint a = cohomog1_ricci(c, t, CohomFamily::projective);
                const CurvaturePoint b = doubly_warped_curvature(dw, t);
                const double F = f(t), H = h(t), q4 = F * F / std::pow(H, 4);
                CHECK(a.at("Ric(dt,dt)") == doctest::Approx(b.at("Ric(dt,dt)")));
                CHECK(a.at("Ric(V,V)") == doctest::Approx(b.at("Ric(u,u)") + k * q4));
                CHECK(a.at("Ric(X,X)") ==
                      doctest::Approx(b.at("Ric(v,v)") + 3.0 * (d - 1) / (H * H) - 2.0 * (d - 1) * q4));
            }
        }
    }
}

TEST_CASE("cohomogeneity one double collapse agrees with the interior limit") {
    const Interval dom{-1.0, 1.0};
    // f = sin(t+1) + 0.1 (t+1)^3, h = sin(t+1)
    const SmoothCurve f = sine(1.0, 1.0, 1.0, dom) + SmoothCurve(dom, [](double t) {
                              const double u = t + 1.0;
                              return Jet{0.1 * u * u * u, 0.3 * u * u, 0.6 * u, 0.6};
                          });
    const SmoothCurve h = sine(1.0, 1.0, 1.0, dom);
    const CohomOneMetric m{4, 2, f, h};
    const CurvaturePoint e = cohomog1_ricci(m, -1.0, CohomFamily::projective);
    const double e1 = 4e-3;
    const CurvaturePoint a = cohomog1_ricci(m, -1.0 + e1, CohomFamily::projective);
    const CurvaturePoint b = cohomog1_ricci(m, -1.0 + e1 / 2, CohomFamily::projective);
    for (const auto& [l, v] : e.entries) {
        INFO(l);
        CHECK(std::abs(v - (4 * b.at(l) - a.at(l)) / 3) < 1e-4);
    }
}

TEST_CASE("finite-difference oracle basics") {
    const MetricChart flat = [](const Eigen::VectorXd& x) { return Eigen::MatrixXd::Identity(x.size(), x.size()); };
    Eigen::VectorXd x(3);
    x << 0.3, -0.2, 1.1;
    CHECK(fd_ricci(flat, x).cwiseAbs().maxCoeff() < 1e-8);
    // flat plane in polar coordinates has non-zero Christoffel symbols
    const MetricChart polar = [](const Eigen::VectorXd& y) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Identity(2, 2);
        g(1, 1) = y(0) * y(0);
        return g;
    };
    Eigen::VectorXd y(2);
    y << 1.3, 0.4;
    CHECK(fd_ricci(polar, y).cwiseAbs().maxCoeff() < 1e-5);  // O(step^2) truncation

    const DoublyWarpedMetric s3 = round_metric(1, 1);
    Eigen::VectorXd z(3);
    z << 0.6, 1.0, 2.0;
    const Eigen::VectorXd ev = ricci_eigenvalues(doubly_warped_chart(s3), z);
    for (int i = 0; i < ev.size(); ++i) CHECK(std::abs(ev(i) - 2.0) < 1e-4);

    Eigen::VectorXd edge(3);
    edge << 1e-4, 1.0, 1.0;
    CHECK_THROWS_AS(fd_curvature_oracle(s3, edge), ChartBoundary);
    Eigen::VectorXd pole(5);
    pole << 0.5, 1e-4, 1.0, 1.0, 1.0;
    CHECK_THROWS_AS(fd_curvature_oracle(round_metric(2, 2), pole), ChartBoundary);
}

TEST_CASE("closed-form Ricci matches the finite-difference oracle") {
    const Interval dom{0.0, 1.5};
    std::vector<DoublyWarpedMetric> metrics{
        round_metric(2, 2),
        {2, 3, shifted(sine(0.3, 1.3, 0.2, dom), 1.0), shifted(cosine(0.2, 2.0, 0.0, dom), 0.8), {}},
        {3, 2, affine(0.4, 0.5, dom) * shifted(sine(0.1, 3.0, 0.0, dom), 1.0), shifted(sine(0.25, 0.8, 1.0, dom), 0.7),
         {}},
        {1, 3, shifted(cosine(0.3, 1.0, 0.0, dom), 1.2), affine(-0.2, 1.0, dom), {}},
    };
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ang(0.4, M_PI - 0.4), last(0.0, 2 * M_PI);
    int checked = 0;
    for (const auto& m : metrics) {
        std::uniform_real_distribution<double> tt(m.f.lo() + 0.1, std::min(m.f.hi(), 1.4) - 0.1);
        for (int i = 0; i < 15; ++i) {
            Eigen::VectorXd x(1 + m.p + m.q);
            x(0) = tt(rng);
            for (int k = 1; k < x.size(); ++k) x(k) = ang(rng);
            x(m.p) = last(rng);
            x(m.p + m.q) = last(rng);
            const auto fd = fd_frame_ricci(m, x);
            const CurvaturePoint c = doubly_warped_curvature(m, x(0));
            INFO("p=" << m.p << " q=" << m.q << " t=" << x(0));
            CHECK(close_rel(fd[0], c.at("Ric(dt,dt)"), 1e-4));
            CHECK(close_rel(fd[1], c.at("Ric(u,u)"), 1e-4));
            CHECK(close_rel(fd[2], c.at("Ric(v,v)"), 1e-4));
            ++checked;
        }
    }
    CHECK(checked >= 50);
}

TEST_CASE("positive curvature is closed under convex combination") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> eps(0.0, 0.1);
    const Interval dom{0.0, M_PI / 2};
    // f(0)=0, f'(0)=1, symmetric about pi/2; h is its mirror image
    auto member = [&](double e) {
        const SmoothCurve f = sine(1 + e, 1.0, 0.0, dom) - sine(e / 3, 3.0, 0.0, dom);
        const SmoothCurve h = cosine(1 + e, 1.0, 0.0, dom) + cosine(e / 3, 3.0, 0.0, dom);
        return DoublyWarpedMetric{2, 2, f, h, {0.0, M_PI / 2}};
    };
    for (int trial = 0; trial < 8; ++trial) {
        const DoublyWarpedMetric a = member(eps(rng)), b = member(eps(rng));
        for (const auto* m : {&a, &b})
            for (const Margin& g : sphere_positivity_margins(*m, 512)) CHECK(g.passes());
        for (double s : {0.25, 0.5, 0.75}) {
            const DoublyWarpedMetric c{2, 2, lerp(a.f, b.f, s), lerp(a.h, b.h, s), {0.0, M_PI / 2}};
            for (const Margin& g : sphere_positivity_margins(c, 512)) {
                INFO(g.label << " s=" << s);
                CHECK(g.passes());
            }
            for (double t : linspace(0.0, M_PI / 2, 65)) {
                const CurvaturePoint pt = doubly_warped_curvature(c, t);
                for (const auto& [l, v] : pt.entries) CHECK(v > 0.0);
            }
        }
    }
}

TEST_CASE("curvature sweep CSV") {
    std::ostringstream os;
    const DoublyWarpedMetric m = round_metric(1, 1);
    write_curvature_sweep(os, {doubly_warped_curvature(m, 0.2), doubly_warped_curvature(m, 0.4)});
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "t,Ric(dt,dt),Ric(u,u),Ric(v,v),sec(dt,u),sec(dt,v),sec(u,u'),sec(u,v),sec(v,v')");
}
