#include "riccibench/curve.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rb {

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::closed_form: return "closed-form";
        case Provenance::ode_defined: return "ode-defined";
        case Provenance::blended: return "blended";
    }
    return "unknown";
}

SmoothCurve::SmoothCurve(Interval dom, JetFn fn, Provenance p) : dom_(dom), fn_(std::move(fn)), prov_(p) {
    if (!(dom.hi > dom.lo)) throw std::invalid_argument("SmoothCurve: empty domain");
}

Jet SmoothCurve::jet(double t) const {
    const double slack = 1e-12 * std::max(1.0, dom_.length());
    if (!dom_.contains(t, slack)) {
        std::ostringstream msg;
        msg << "SmoothCurve: t=" << t << " outside [" << dom_.lo << ", " << dom_.hi << "]";
        throw std::domain_error(msg.str());
    }
    return fn_(t);
}

double SmoothCurve::eval(double t, int k) const {
    if (k < 0 || k > 3) throw std::invalid_argument("SmoothCurve::eval: derivative order must be 0..3");
    return jet(t)[k];
}

SmoothCurve SmoothCurve::restricted(Interval dom) const { return SmoothCurve(dom, fn_, prov_); }

SmoothCurve SmoothCurve::with_provenance(Provenance p) const { return SmoothCurve(dom_, fn_, p); }

static Interval intersect(const Interval& a, const Interval& b) {
    Interval r{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
    if (!(r.hi > r.lo)) throw std::invalid_argument("curve algebra: disjoint domains");
    return r;
}

static Provenance combine(Provenance a, Provenance b) {
    if (a == Provenance::closed_form) return b;
    if (b == Provenance::closed_form) return a;
    return a == b ? a : Provenance::blended;
}

SmoothCurve constant(double c, Interval dom) {
    return SmoothCurve(dom, [c](double) { return Jet{c, 0.0, 0.0, 0.0}; });
}

SmoothCurve affine(double slope, double offset, Interval dom) {
    return SmoothCurve(dom, [slope, offset](double t) { return Jet{slope * t + offset, slope, 0.0, 0.0}; });
}

SmoothCurve sine(double amp, double w, double phase, Interval dom) {
    return SmoothCurve(dom, [=](double t) {
        const double s = std::sin(w * t + phase), c = std::cos(w * t + phase);
        return Jet{amp * s, amp * w * c, -amp * w * w * s, -amp * w * w * w * c};
    });
}

SmoothCurve cosine(double amp, double w, double phase, Interval dom) {
    return SmoothCurve(dom, [=](double t) {
        const double s = std::sin(w * t + phase), c = std::cos(w * t + phase);
        return Jet{amp * c, -amp * w * s, -amp * w * w * c, amp * w * w * w * s};
    });
}

SmoothCurve operator+(const SmoothCurve& a, const SmoothCurve& b) {
    return SmoothCurve(intersect(a.domain(), b.domain()),
                       [a, b](double t) {
                           Jet x = a.jet(t), y = b.jet(t);
                           return Jet{x[0] + y[0], x[1] + y[1], x[2] + y[2], x[3] + y[3]};
                       },
                       combine(a.provenance(), b.provenance()));
}

SmoothCurve operator*(double c, const SmoothCurve& a) {
    return SmoothCurve(a.domain(),
                       [a, c](double t) {
                           Jet x = a.jet(t);
                           return Jet{c * x[0], c * x[1], c * x[2], c * x[3]};
                       },
                       a.provenance());
}

SmoothCurve operator-(const SmoothCurve& a, const SmoothCurve& b) { return a + (-1.0) * b; }

Jet jet_product(const Jet& x, const Jet& y) {
    return Jet{x[0] * y[0], x[1] * y[0] + x[0] * y[1], x[2] * y[0] + 2 * x[1] * y[1] + x[0] * y[2],
               x[3] * y[0] + 3 * x[2] * y[1] + 3 * x[1] * y[2] + x[0] * y[3]};
}

SmoothCurve operator*(const SmoothCurve& a, const SmoothCurve& b) {
    return SmoothCurve(intersect(a.domain(), b.domain()),
                       [a, b](double t) { return jet_product(a.jet(t), b.jet(t)); },
                       combine(a.provenance(), b.provenance()));
}

SmoothCurve shifted(const SmoothCurve& a, double c) {
    return SmoothCurve(a.domain(),
                       [a, c](double t) {
                           Jet x = a.jet(t);
                           x[0] += c;
                           return x;
                       },
                       a.provenance());
}

// Faa di Bruno up to third order
Jet jet_compose(const Jet& F, const Jet& g) {
    const double g1 = g[1], g2 = g[2], g3 = g[3];
    return Jet{F[0], F[1] * g1, F[2] * g1 * g1 + F[1] * g2, F[3] * g1 * g1 * g1 + 3 * F[2] * g1 * g2 + F[1] * g3};
}

SmoothCurve compose(const SmoothCurve& outer, const SmoothCurve& inner) {
    return SmoothCurve(inner.domain(),
                       [outer, inner](double t) {
                           Jet g = inner.jet(t);
                           return jet_compose(outer.jet(g[0]), g);
                       },
                       combine(outer.provenance(), inner.provenance()));
}

SmoothCurve reparam(const SmoothCurve& a, double scale, double offset) {
    if (scale == 0.0) throw std::invalid_argument("reparam: zero scale");
    double t1 = (a.lo() - offset) / scale, t2 = (a.hi() - offset) / scale;
    Interval dom{std::min(t1, t2), std::max(t1, t2)};
    return SmoothCurve(dom,
                       [a, scale, offset](double t) {
                           Jet x = a.jet(scale * t + offset);
                           return Jet{x[0], scale * x[1], scale * scale * x[2], scale * scale * scale * x[3]};
                       },
                       a.provenance());
}

SmoothCurve lerp(const SmoothCurve& a, const SmoothCurve& b, double s) { return (1.0 - s) * a + s * b; }

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 2) throw std::invalid_argument("linspace: need at least two samples");
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    v.back() = hi;
    return v;
}

void write_node_table(std::ostream& os, const SmoothCurve& c, const std::vector<double>& ts) {
    os << "t,v0,v1,v2,v3\n";
    os << std::setprecision(17);
    for (double t : ts) {
        Jet j = c.jet(t);
        os << t << ',' << j[0] << ',' << j[1] << ',' << j[2] << ',' << j[3] << '\n';
    }
}

void write_node_table(std::ostream& os, const SmoothCurve& c, int n) {
    write_node_table(os, c, linspace(c.lo(), c.hi(), n));
}

}  // namespace rb
