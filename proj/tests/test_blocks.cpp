#include <doctest.h>

#include <cmath>
#include <random>

#include "riccibench/blocks.hpp"
#include "riccibench/funcspace.hpp"

using namespace rb;

namespace {

constexpr int kGrid = 512;

double margin_of(const BlockReport& r, const std::string& label) {
    const Margin* m = r.margin(label);
    REQUIRE_MESSAGE(m != nullptr, label);
    return m->min;
}

const Sweep& sweep_of(const BlockReport& r, const std::string& name) {
    for (const Sweep& s : r.sweeps)
        if (s.name == name) return s;
    FAIL("missing sweep " << name);
    return r.sweeps.front();
}

}  // namespace

// ---- closed forms, frozen against an independent high-precision evaluation ----------

TEST_CASE("handle1 corner angle closed form") {
    CHECK(corner_angle_handle1(0.9, 0.05) == doctest::Approx(1.39115107681326989).epsilon(1e-12));
    CHECK(corner_angle_handle1(0.98, 0.01) == doctest::Approx(1.52978953026987493).epsilon(1e-12));
    CHECK(corner_angle_handle1(0.5, 0.1) == doctest::Approx(1.42863303972628269).epsilon(1e-12));
    CHECK(2.0 * std::sin(0.9 * (M_PI / 2 - 0.05)) - 1.0 == doctest::Approx(0.959302599).epsilon(1e-8));
    CHECK(2.0 * std::sin(0.98 * (M_PI / 2 - 0.01)) - 1.0 == doctest::Approx(0.998301488).epsilon(1e-8));
    CHECK(2.0 * std::sin(0.5 * (M_PI / 2 - 0.1)) - 1.0 == doctest::Approx(0.341764945).epsilon(1e-8));
}

TEST_CASE("handle1 angle sign agrees with the sine test on random samples") {
    std::mt19937_64 rng(20261014);
    std::uniform_real_distribution<double> lam(0.2, 0.99), eps(0.001, 0.3);
    for (int i = 0; i < 400; ++i) {
        const double l1 = lam(rng), e1 = eps(rng);
        const double sine_test = 2.0 * std::sin(l1 * (M_PI / 2 - e1)) - 1.0;
        if (std::abs(sine_test) < 1e-9) continue;
        const double theta = corner_angle_handle1(l1, e1);
        CHECK_MESSAGE((sine_test > 0.0) == (theta < M_PI / 2), "lambda1=" << l1 << " eps1=" << e1);
    }
}

TEST_CASE("handle2 closed forms") {
    CHECK(handle2_corner_angle(0.05) == doctest::Approx(1.62075472251683938).epsilon(1e-12));
    CHECK(handle2_corner_angle(1.0) == doctest::Approx(3 * M_PI / 4).epsilon(1e-14));
    CHECK(handle2_corner_angle(1e-9) == doctest::Approx(M_PI / 2).epsilon(1e-8));
    for (double a : {0.0, 0.1, 0.3, 0.5, 0.7})
        CHECK(handle2_closed_form_margin(0.2, 0.25, a, 1.5, 0.0) ==
              doctest::Approx(1.0 / 6.0 - 0.34375 * a * a).epsilon(1e-13));
    CHECK(handle2_closed_form_margin(0.2, 0.25, 0.5, 1.5, 0.0) > 0.0);
    CHECK(handle2_closed_form_margin(0.2, 0.25, 0.7, 1.5, 0.0) < 0.0);
}

TEST_CASE("boundary conformal margin") {
    CHECK(boundary_conformal_margin(0.0, 3.0) == 1.0);
    CHECK(boundary_conformal_margin(1.0, 10.0) == doctest::Approx(0.87).epsilon(1e-14));
    CHECK(boundary_conformal_margin(5.0, 1e12) == doctest::Approx(1.0).epsilon(1e-9));
}

// ---- cone metric -------------------------------------------------------------

TEST_CASE("cone metric family") {
    std::vector<BlockReport> reps;
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        ConeParams p;
        p.t = t;
        const ConeResult c = build_cone_metric(p, kGrid);
        CHECK_MESSAGE(c.report.passed(), "t=" << t << " " << c.report.first_failure().value_or(""));
        CHECK(c.report.aux.at("K_t") == doctest::Approx(1.0 - t * 0.1).epsilon(1e-14));
        reps.push_back(c.report);
    }
    const BlockReport& last = reps.back();
    CHECK(margin_of(last, "rescaled_Ric(ds,ds)_minus_(n-1)") > 0.0);
    CHECK(margin_of(last, "rescaled_Ric(X,X)_minus_(n-1)") > 0.0);
    CHECK(last.aux.at("middle_piece_deviation") < 1e-12);

    // t = 0 is the round metric: f = sin
    ConeParams p0;
    p0.t = 0.0;
    const ConeResult c0 = build_cone_metric(p0, kGrid);
    for (double s : {0.3, 0.8, 1.2}) CHECK(c0.f(s) == doctest::Approx(std::sin(s)).epsilon(1e-9));
}

TEST_CASE("cone margins vary continuously in t") {
    for (int i = 0; i < 20; ++i) {
        const double t = 0.05 * i;
        ConeParams a, b;
        a.t = t;
        b.t = 0.05 * (i + 1);
        const BlockReport ra = build_cone_metric(a, kGrid).report, rb = build_cone_metric(b, kGrid).report;
        for (const Margin& m : ra.margins) {
            const Margin* n = rb.margin(m.label);
            if (!n) continue;
            CHECK_MESSAGE(std::abs(m.min - n->min) < 0.2, m.label << " at t=" << t);
        }
    }
}

TEST_CASE("cone rejects bands that do not fit") {
    ConeParams p;
    p.delta = 0.5;
    CHECK_THROWS(build_cone_metric(p, kGrid));
}

// ---- handles -----------------------------------------------------------------------

TEST_CASE("handle1 defaults pass with the linear-f angle close to the full angle") {
    const Handle1Result h = build_handle1(Handle1Params{}, kGrid);
    CHECK_MESSAGE(h.report.passed(), h.report.first_failure().value_or(""));
    CHECK(h.theta < M_PI / 2);
    CHECK(h.report.aux.at("theta_linear") == doctest::Approx(corner_angle_handle1(0.98, 0.01)).epsilon(1e-12));
    CHECK(std::abs(h.theta - corner_angle_handle1(0.98, 0.01)) < 10 * (0.99 - 0.98));
}

TEST_CASE("handle1 cap profile sweep matches finite differences") {
    const Handle1Result h = build_handle1(Handle1Params{}, kGrid);
    const Sweep& s = sweep_of(h.report, "handle1_cap_profile");
    const auto& phi = s.columns.at("phi");
    const auto& d2 = s.columns.at("phi''");
    CHECK(phi.front() == doctest::Approx(std::sin(0.01)).epsilon(1e-12));
    const double dr = s.axis_values[1] - s.axis_values[0];
    for (std::size_t i = 1; i + 1 < phi.size(); i += 37) {
        const double fd = (phi[i + 1] - 2 * phi[i] + phi[i - 1]) / (dr * dr);
        CHECK(fd == doctest::Approx(d2[i]).epsilon(1e-3));
        CHECK(d2[i] < 0.0);
    }
}

TEST_CASE("handle1 sphere entry and tangent chain over the parameter range") {
    for (double l1 : {0.85, 0.9, 0.95, 0.99})
        for (double e1 : {0.001, 0.05, 0.1}) {
            Handle1Params p;
            p.lambda1 = l1;
            p.lambda2 = std::min(l1 + 0.005, 0.995);
            p.eps1 = e1;
            const BlockReport r = build_handle1(p, kGrid).report;
            CHECK_MESSAGE(margin_of(r, "a_II_sphere") > 0.0, l1 << " " << e1);
            CHECK_MESSAGE(margin_of(r, "a_tan_chain") > 0.0, l1 << " " << e1);
        }
}

TEST_CASE("handle1 with lambda1 far from 1 fails the angle condition") {
    Handle1Params p;
    p.lambda1 = 0.3;
    p.lambda2 = 0.31;
    p.eps1 = 0.01;
    const BlockReport r = build_handle1(p, kGrid).report;
    CHECK_FALSE(r.passed());
    CHECK(margin_of(r, "d_closed_form_angle_sign") < 0.0);
}

TEST_CASE("handle2 closed form is conservative") {
    for (double a : {0.01, 0.02, 0.05, 0.1}) {
        const BlockReport r = run_block("handle2", {{"a", a}}, kGrid);
        CHECK_MESSAGE(margin_of(r, "closed_form_conservative") > 0.0, "a=" << a);
        CHECK(r.aux.at("theta") == doctest::Approx(handle2_corner_angle(a)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(run_block("handle2", {{"b", 60.0}}, kGrid), std::invalid_argument);
}

TEST_CASE("handle assembly glues along the corner") {
    const HandleAssembly h = assemble_handle(Handle1Params{}, Handle2Params{}, kGrid);
    CHECK_MESSAGE(h.report.passed(), h.report.first_failure().value_or(""));
    CHECK(margin_of(h.report, "matched_boundary_curves") > 0.0);
    CHECK(h.report.aux.at("theta1") + h.report.aux.at("theta2") < M_PI);
    CHECK(margin_of(h.report, "glue.angle_sum[c2+c1]") > 0.0);
    CHECK(h.report.boundary.face("inner") != nullptr);
    CHECK(h.report.boundary.face("cap") != nullptr);
    CHECK(h.report.boundary.face("collar") != nullptr);
}

TEST_CASE("handle bundle faces") {
    const BlockReport r = build_handle_bundle(HandleBundleParams{}, kGrid);
    CHECK_MESSAGE(r.passed(), r.first_failure().value_or(""));
    const FaceProfile* bottom = r.boundary.face("bottom");
    REQUIRE(bottom);
    CHECK(bottom->kind == FaceKind::bundle_over_base);
    CHECK(bottom->dimension == 4 + 2);
    CHECK(bottom->metric.at("base").front() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bottom->metric.at("fibre").front() == 0.01);
    CHECK(bottom->ii.at("horizontal").front() == doctest::Approx(-r.aux.at("lambda")).epsilon(1e-9));
    const FaceProfile* collar = r.boundary.face("collar");
    REQUIRE(collar);
    CHECK(collar->match_end == "hi");
    CHECK(collar->end_jets.count("base") == 1);
    CHECK(collar->metric.at("base").front() == doctest::Approx(r.aux.at("collar_base")).epsilon(1e-12));
}

// ---- transfer -------------------------------------------------------------------------

TEST_CASE("transfer block defaults") {
    const TransferParams p;
    const BlockReport r = build_transfer_block(p, kGrid);
    CHECK_MESSAGE(r.passed(), r.first_failure().value_or(""));
    const FaceProfile* bottom = r.boundary.face("bottom");
    REQUIRE(bottom);
    CHECK(bottom->ii.at("vertical").front() ==
          doctest::Approx(-p.a * std::exp(-kDefaultH0 * kDefaultH0 / 2) / p.r0).epsilon(1e-9));
    CHECK(bottom->dimension == p.p + p.q);
    CHECK(r.aux.at("f_prime_t0") == doctest::Approx(p.lambda).epsilon(1e-9));
}

TEST_CASE("transfer with C = 0 never reaches lambda") {
    TransferParams p;
    p.C = 0.0;
    CHECK_THROWS_AS(build_transfer_block(p, kGrid), BlockError);
}

TEST_CASE("transfer r1 shrinks with a") {
    double prev = 0.0;
    for (double a : {0.14, 0.16, 0.18, 0.2}) {
        TransferParams p;
        p.a = a;
        p.C = 0.6;
        p.t_max = 1000.0;
        p.step_budget = 131072;
        const BlockReport r = build_transfer_block(p, kGrid);
        CHECK_MESSAGE(r.passed(), "a=" << a << " " << r.first_failure().value_or(""));
        const double r1 = r.aux.at("r1");
        CHECK(r1 > prev);
        prev = r1;
    }
}

TEST_CASE("transfer log axis agrees with the linear axis") {
    TransferParams lin, lg;
    lg.time_axis = "log";
    lg.step_budget = 131072;
    const BlockReport a = build_transfer_block(lin, kGrid), b = build_transfer_block(lg, kGrid);
    CHECK(b.passed());
    CHECK(b.aux.at("t0") == doctest::Approx(a.aux.at("t0")).epsilon(1e-6));
    CHECK(b.aux.at("r1") == doctest::Approx(a.aux.at("r1")).epsilon(1e-6));
    CHECK(b.aux.at("R") == doctest::Approx(a.aux.at("R")).epsilon(1e-6));
    TransferParams bad;
    bad.time_axis = "sqrt";
    CHECK_THROWS(build_transfer_block(bad, kGrid));
}

// ---- circle bundle, fibre disc, sphere transition ----------------------------------

TEST_CASE("s1 block") {
    const BlockReport r = build_s1_block(S1Params{}, kGrid);
    CHECK_MESSAGE(r.passed(), r.first_failure().value_or(""));
    CHECK(r.aux.at("base_factor") == 1.0);
    CHECK(margin_of(r, "h_parity_at_0") > 0.0);
}

TEST_CASE("fibre disc warp") {
    const FibreDiscResult d = build_fibre_disc_warp(FibreDiscParams{}, kGrid);
    CHECK_MESSAGE(d.report.passed(), d.report.first_failure().value_or(""));
    const double t0 = M_PI / 2;
    CHECK(d.h(t0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(d.h.eval(t0, 1)) < 1e-8);
    CHECK(d.h(0.0) == doctest::Approx(0.0));
    CHECK(d.h.eval(0.0, 1) == doctest::Approx(1.0).epsilon(1e-9));
    for (double t = 0.05; t < t0; t += 0.1) {
        const double h = d.h(t), h1 = d.h.eval(t, 1);
        CHECK((1.0 - h1 * h1) / (h * h) > 0.0);
    }
    FibreDiscParams bad;
    bad.t0 = 0.9;
    CHECK_THROWS_AS(build_fibre_disc_warp(bad, kGrid), BlockError);
}

TEST_CASE("sphere transition") {
    const Interval dom{0.0, M_PI / 2};
    auto pair = [&](double e) {
        SmoothCurve A = (1.0 + e) * sine(1.0, 1.0, 0.0, dom) - (e / 3.0) * sine(1.0, 3.0, 0.0, dom);
        SmoothCurve B = (1.0 + e) * cosine(1.0, 1.0, 0.0, dom) + (e / 3.0) * cosine(1.0, 3.0, 0.0, dom);
        return std::pair{A, B};
    };
    const auto [A0, B0] = pair(0.0);
    const BlockReport round = build_sphere_transition(A0, B0, 2, 3, kGrid);
    CHECK_MESSAGE(round.passed(), round.first_failure().value_or(""));
    CHECK(margin_of(round, "f_third_negative_at_0") == doctest::Approx(1.0).epsilon(1e-9));

    const auto [A1, B1] = pair(0.1);
    const SmoothCurve Am = 0.5 * A0 + 0.5 * A1, Bm = 0.5 * B0 + 0.5 * B1;
    CHECK(build_sphere_transition(A1, B1, 2, 3, kGrid).passed());
    CHECK(build_sphere_transition(Am, Bm, 2, 3, kGrid).passed());

    // A'' = -sin s - 2.7 sin 3s turns positive near s = pi/2
    const SmoothCurve Abad = sine(1.0, 1.0, 0.0, dom) + 0.3 * sine(1.0, 3.0, 0.0, dom);
    const BlockReport bad = build_sphere_transition(Abad, B0, 2, 3, kGrid);
    CHECK_FALSE(bad.passed());
    const Margin* m = bad.margin("f_second_negative");
    REQUIRE(m);
    CHECK(m->min < 0.0);
    CHECK(m->argmin > 1.0);
}

// ---- cohomogeneity one families --------------------------------------------------------

TEST_CASE("projective families") {
    for (auto [d, n] : {std::pair{2, 2}, {2, 3}, {4, 2}, {8, 2}})
        for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            ProjectiveParams p;
            p.d = d;
            p.n = n;
            p.s = s;
            const BlockReport r = projective_family_check(p, kGrid);
            CHECK_MESSAGE(r.passed(), "d=" << d << " n=" << n << " s=" << s << " " << r.first_failure().value_or(""));
            CHECK(margin_of(r, "key_inequality") > 0.0);
            CHECK(margin_of(r, "trig_sin_bound") > 0.0);
            CHECK(margin_of(r, "trig_cos_bound") > 0.0);
        }
}

TEST_CASE("wu g00 Ricci diagonal at 0") {
    const BlockReport r = wu_family_check(WuParams{}, kGrid);
    CHECK(r.passed());
    const double q = M_PI * M_PI / 4;
    CHECK(std::abs(r.aux.at("Ric(dt,dt)@0") - q) < 1e-6);
    CHECK(std::abs(r.aux.at("Ric(X,X)@0") - 2 * q) < 1e-6);
    CHECK(std::abs(r.aux.at("Ric(V,V)@0") - 3 * q) < 1e-6);
}

TEST_CASE("wu blended path") {
    WuParams p;
    p.variant = "blended";
    const BlockReport r = wu_family_check(p, kGrid);
    CHECK_MESSAGE(r.passed(), r.first_failure().value_or(""));
    int paths = 0;
    for (const Margin& m : r.margins)
        if (m.label.find("@s=") != std::string::npos) {
            ++paths;
            CHECK(m.min > 0.0);
        }
    CHECK(paths == 15);
    CHECK(margin_of(r, "blend_equals_f0_on_core") > 0.0);

    p.eps = 0.2;
    CHECK_THROWS_AS(wu_family_check(p, kGrid), BlockError);
    p.eps = 0.05;
    p.eps_prime = 0.2;
    CHECK_THROWS_AS(wu_family_check(p, kGrid), BlockError);
}

// ---- registry -----------------------------------------------------------------------

TEST_CASE("registry builds every block deterministically") {
    for (const std::string& name : block_names()) {
        const std::string a = to_json(run_block(name, json::object(), kGrid)).dump();
        const std::string b = to_json(run_block(name, json::object(), kGrid)).dump();
        CHECK_MESSAGE(a == b, name);
    }
}

TEST_CASE("registry rejects unknown names and keys") {
    CHECK_THROWS_AS(run_block("moebius", json::object(), kGrid), std::invalid_argument);
    CHECK_THROWS_AS(run_block("cone", {{"kappa", 1.0}}, kGrid), std::invalid_argument);
    CHECK_THROWS_AS(run_block("handle", {{"handle1", {{"zeta", 1}}}}, kGrid), std::invalid_argument);
    CHECK_THROWS_AS(run_block("s1", json::array(), kGrid), std::invalid_argument);
}
