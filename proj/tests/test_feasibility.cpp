#include <doctest.h>

#include <cmath>

#include "riccibench/blocks.hpp"
#include "riccibench/feasibility.hpp"

using namespace rb;

namespace {

ParamAxis axis(const std::string& name, double lo, double hi, int res, bool lo_open = false) {
    ParamAxis a;
    a.name = name;
    a.lo = lo;
    a.hi = hi;
    a.resolution = res;
    a.lo_open = lo_open;
    return a;
}

ParamBox handle1_box(double l_lo, double l_hi, int res) {
    ParamBox b;
    b.axes = {axis("eps1", 0.01, 0.1, 2), axis("eps2", 0.01, 0.1, 2), axis("lambda1", l_lo, l_hi, res)};
    b.links = {ParamLink{"lambda2", "lambda1", 1.0, 0.01}};
    return b;
}

}  // namespace

TEST_CASE("axes and boxes") {
    ParamAxis a = axis("a", 0.0, 0.5, 3, true);
    CHECK(a.lo_eff() == doctest::Approx(0.5e-6));
    CHECK(a.samples().front() == a.lo_eff());
    CHECK(a.samples().back() == 0.5);
    CHECK(axis("p", 0.3, 0.3, 7).samples() == std::vector<double>{0.3});

    ParamBox b;
    b.axes = {axis("handle1.lambda1", 0.9, 0.9, 1)};
    b.links = {ParamLink{"handle1.lambda2", "handle1.lambda1", 1.0, 0.01}};
    b.fixed = {{"fibre_dim", 2}};
    const json rec = b.record({{"handle1.lambda1", 0.9}});
    CHECK(rec.at("handle1").at("lambda1") == 0.9);
    CHECK(rec.at("handle1").at("lambda2").get<double>() == doctest::Approx(0.91));
    CHECK(rec.at("fibre_dim") == 2);
}

TEST_CASE("box JSON") {
    const json j = {{"axes", {{"lambda1", {{"lo", 0.85}, {"hi", 0.99}, {"resolution", 4}}},
                              {"eps1", {{"lo", 0.0}, {"hi", 0.1}, {"open", "lo"}}}}},
                    {"links", {{"lambda2", {{"from", "lambda1"}, {"offset", 0.01}}}}},
                    {"fixed", {{"n", 4}}}};
    const ParamBox b = box_from_json(j);
    REQUIRE(b.axes.size() == 2);
    CHECK(b.axes[0].name == "eps1");
    CHECK(b.axes[0].lo_open);
    CHECK(b.grid_size() == 20);
    CHECK(to_json(box_from_json(to_json(b))).dump() == to_json(b).dump());
    CHECK_THROWS_AS(box_from_json({{"axes", {{"x", {{"lo", 1.0}, {"hi", 0.0}}}}}}), std::invalid_argument);
    CHECK_THROWS_AS(box_from_json({{"axes", {{"x", {{"lo", 0.0}, {"hi", 1.0}, {"step", 2}}}}}}), std::invalid_argument);
    CHECK_THROWS_AS(box_from_json({{"links", {{"y", {{"from", "x"}}}}}}), std::invalid_argument);
    CHECK_THROWS_AS(box_from_json({{"bounds", {}}}), std::invalid_argument);
}

TEST_CASE("handle1 scan near lambda1 = 1 is nonempty and sound") {
    const Certificate c = scan(handle1_box(0.97, 0.98, 2), {"handle1", {}}, 1000, 0, 256);
    CHECK(c.sampling == "grid");
    CHECK(c.evaluated == 8);
    REQUIRE_FALSE(c.empty());
    for (std::size_t i = 1; i < c.passes.size(); ++i) CHECK(c.passes[i - 1].score >= c.passes[i].score);
    const Sample& best = *c.best();
    const BlockReport again = run_block("handle1", best.params, 256);
    CHECK(again.passed());
    CHECK(again.aux.at("theta") < M_PI / 2);
    CHECK(again.min_margin() == best.score);
    const Reverification r = reverify(c, 512);
    CHECK(r.all_ok());
}

TEST_CASE("handle1 scan far from lambda1 = 1 is empty") {
    const Certificate c = scan(handle1_box(0.1, 0.3, 3), {"handle1", {"d_closed_form_angle_sign"}}, 1000, 0, 256);
    CHECK(c.empty());
    CHECK(c.evaluated == 12);
    CHECK(to_json(c).at("best").is_null());
}

TEST_CASE("collapsed box gives its single point") {
    ParamBox b;
    b.axes = {axis("lambda1", 0.98, 0.98, 5), axis("eps1", 0.01, 0.01, 5)};
    b.links = {ParamLink{"lambda2", "lambda1", 1.0, 0.01}};
    const Certificate c = scan(b, {"handle1", {}}, 100, 0, 256);
    REQUIRE(c.passes.size() == 1);
    CHECK(c.best()->point.at("lambda1") == 0.98);
    CHECK(c.best()->point.at("eps1") == 0.01);
}

TEST_CASE("scans are deterministic and randomized scans honour the seed") {
    ParamBox b;
    b.axes = {axis("a", 0.01, 0.6, 50)};
    b.fixed = {{"lambda1", 0.2}, {"lambda2", 0.25}, {"b", 1.5}};
    const Predicate pred{"handle2", {"II_radial_closed_form"}};
    const std::string x = to_json(scan(b, pred, 8, 42, 128)).dump();
    CHECK(x == to_json(scan(b, pred, 8, 42, 128)).dump());
    CHECK(x != to_json(scan(b, pred, 8, 43, 128)).dump());
    CHECK(to_json(scan(b, pred, 8, 42, 128)).at("sampling") == "random");
}

TEST_CASE("ties are broken by parameter values") {
    ParamBox b;
    b.axes = {axis("t0", 1.2, 1.6, 5)};
    const Certificate c = scan(b, {"fibre_disc", {"h_parity_at_0"}}, 100, 0, 128);
    REQUIRE(c.passes.size() == 5);
    for (std::size_t i = 1; i < c.passes.size(); ++i) {
        CHECK(c.passes[i - 1].score == c.passes[i].score);
        CHECK(c.passes[i - 1].point.at("t0") < c.passes[i].point.at("t0"));
    }
}

TEST_CASE("refine") {
    SUBCASE("target at the current best returns the input") {
        ParamBox b;
        b.axes = {axis("a", 0.01, 0.6, 4)};
        b.fixed = {{"lambda1", 0.2}, {"lambda2", 0.25}, {"b", 1.5}};
        const Certificate c = scan(b, {"handle2", {"II_radial_closed_form"}}, 100, 0, 128);
        REQUIRE_FALSE(c.empty());
        const Certificate r = refine(c, c.best()->score);
        CHECK(to_json(r).dump() == to_json(c).dump());
    }
    SUBCASE("handle2 closed form toward 0.05") {
        ParamBox b;
        b.axes = {axis("a", 0.55, 0.65, 1)};
        b.fixed = {{"lambda1", 0.2}, {"lambda2", 0.25}, {"b", 1.5}};
        const Predicate pred{"handle2", {"II_radial_closed_form"}};
        const Certificate c = scan(b, pred, 100, 0, 128);
        REQUIRE(c.passes.size() == 1);
        CHECK(c.best()->score == doctest::Approx(1.0 / 6 - 0.34375 * 0.36).epsilon(1e-9));
        const Certificate r = refine(c, 0.05);
        CHECK(r.best()->score >= 0.05);
        // 1/6 - 0.34375 a^2 >= 0.05 iff a <= 0.5826
        CHECK(r.best()->point.at("a") <= 0.5826);
        CHECK_THROWS_AS(refine(c, 0.5), TargetUnreachable);
    }
    SUBCASE("transfer refine improves monotonically") {
        ParamBox b;
        b.axes = {axis("C", 0.3, 0.6, 2), axis("a", 0.14, 0.2, 2)};
        b.fixed = {{"lambda", 0.5}, {"r0", 0.1}};
        const Certificate c = scan(b, {"transfer", {}}, 100, 0, 128);
        REQUIRE_FALSE(c.empty());
        const double start = c.best()->score;
        try {
            const Certificate r = refine(c, 10 * start);
            CHECK(r.best()->score >= 10 * start);
            for (std::size_t i = 1; i < r.iterations.size(); ++i) CHECK(r.iterations[i] >= r.iterations[i - 1]);
        } catch (const TargetUnreachable& e) {
            const auto& it = e.last().iterations;
            REQUIRE_FALSE(it.empty());
            for (std::size_t i = 1; i < it.size(); ++i) CHECK(it[i] >= it[i - 1]);
            CHECK(it.back() > start);
        }
    }
}

TEST_CASE("predicates with unknown margins or keys are configuration errors") {
    ParamBox b;
    b.axes = {axis("t0", 1.2, 1.6, 2)};
    CHECK_THROWS_AS(scan(b, {"fibre_disc", {"nope"}}, 100, 0, 128), ParamError);
    b.fixed = {{"zeta", 1}};
    CHECK_THROWS_AS(scan(b, {"fibre_disc", {}}, 100, 0, 128), ParamError);
}
