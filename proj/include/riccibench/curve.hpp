#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace rb {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
    bool contains(double t, double slack = 0.0) const { return t >= lo - slack && t <= hi + slack; }
};

enum class Provenance { closed_form, ode_defined, blended };
std::string to_string(Provenance p);

// value and first three derivatives at a point
using Jet = std::array<double, 4>;

class SmoothCurve {
public:
    using JetFn = std::function<Jet(double)>;

    SmoothCurve() = default;
    SmoothCurve(Interval dom, JetFn fn, Provenance p = Provenance::closed_form);

    const Interval& domain() const { return dom_; }
    double lo() const { return dom_.lo; }
    double hi() const { return dom_.hi; }
    Provenance provenance() const { return prov_; }
    bool valid() const { return static_cast<bool>(fn_); }

    // throws std::domain_error outside the domain (a relative slack of 1e-12 is allowed)
    Jet jet(double t) const;
    double eval(double t, int k = 0) const;
    double operator()(double t) const { return eval(t, 0); }

    // same curve on a sub-interval (or a slightly larger one when the formula allows it)
    SmoothCurve restricted(Interval dom) const;
    SmoothCurve with_provenance(Provenance p) const;

private:
    Interval dom_{};
    JetFn fn_;
    Provenance prov_ = Provenance::closed_form;
};

// closed-form builders
SmoothCurve constant(double c, Interval dom);
SmoothCurve affine(double slope, double offset, Interval dom);
// amp * sin(freq * t + phase)
SmoothCurve sine(double amp, double freq, double phase, Interval dom);
// amp * cos(freq * t + phase)
SmoothCurve cosine(double amp, double freq, double phase, Interval dom);

// algebra; domains are intersected
SmoothCurve operator+(const SmoothCurve& a, const SmoothCurve& b);
SmoothCurve operator-(const SmoothCurve& a, const SmoothCurve& b);
SmoothCurve operator*(const SmoothCurve& a, const SmoothCurve& b);
SmoothCurve operator*(double c, const SmoothCurve& a);
SmoothCurve shifted(const SmoothCurve& a, double c);  // a + c
// t -> outer(inner(t)); inner's range must lie in outer's domain
SmoothCurve compose(const SmoothCurve& outer, const SmoothCurve& inner);
// t -> a(scale * t + offset) on the preimage of a's domain
SmoothCurve reparam(const SmoothCurve& a, double scale, double offset);
// (1-s) a + s b
SmoothCurve lerp(const SmoothCurve& a, const SmoothCurve& b, double s);

// chain/product rules on jets, exposed for the builders
Jet jet_compose(const Jet& outer_at_inner, const Jet& inner);
Jet jet_product(const Jet& a, const Jet& b);

std::vector<double> linspace(double lo, double hi, int n);

// node table, columns t,v0,v1,v2,v3
void write_node_table(std::ostream& os, const SmoothCurve& c, const std::vector<double>& ts);
void write_node_table(std::ostream& os, const SmoothCurve& c, int n);

}  // namespace rb
