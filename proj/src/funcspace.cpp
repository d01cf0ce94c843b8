#include "riccibench/funcspace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace rb {

namespace {

// 10-point Gauss-Legendre on [-1,1], positive half
constexpr std::array<double, 5> kGLx{0.14887433898163122, 0.4333953941292472, 0.6794095682990244,
                                     0.8650633666889845, 0.9739065285171717};
constexpr std::array<double, 5> kGLw{0.295524224714753, 0.2692667193099965, 0.219086362515982,
                                     0.14945134915058036, 0.06667134430868807};

double gauss_legendre(const std::function<double(double)>& g, double lo, double hi) {
    const double m = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
    double s = 0.0;
    for (std::size_t i = 0; i < kGLx.size(); ++i) s += kGLw[i] * (g(m - r * kGLx[i]) + g(m + r * kGLx[i]));
    return s * r;
}

// integral of the bump over [-1, x] for x <= 0
struct BumpTable {
    Antiderivative left;
    double full;
    BumpTable() : left([](double x) { return bump(x)[0]; }, -1.0, 0.0, 1024), full(2.0 * left.total()) {}
};

const BumpTable& bump_table() {
    static const BumpTable table;
    return table;
}

}  // namespace

Jet bump(double x) {
    if (x <= -1.0 || x >= 1.0) return Jet{0, 0, 0, 0};
    const double q = 1.0 - x * x;
    const double b = std::exp(1.0 - 1.0 / q);
    if (b == 0.0) return Jet{0, 0, 0, 0};
    const double g1 = -2.0 * x / (q * q);
    const double g2 = -2.0 / (q * q) - 8.0 * x * x / (q * q * q);
    const double g3 = -24.0 * x / (q * q * q) - 48.0 * x * x * x / (q * q * q * q);
    return Jet{b, b * g1, b * (g1 * g1 + g2), b * (g1 * g1 * g1 + 3.0 * g1 * g2 + g3)};
}

Jet smooth_step(double u) {
    if (u <= 0.0) return Jet{0, 0, 0, 0};
    if (u >= 1.0) return Jet{1, 0, 0, 0};
    const BumpTable& tab = bump_table();
    const double x = 2.0 * u - 1.0;
    const Jet b = bump(x);
    const double inv = 1.0 / tab.full;
    const double value = (x <= 0.0) ? tab.left(x) * inv : 1.0 - tab.left(-x) * inv;
    return Jet{value, 2.0 * b[0] * inv, 4.0 * b[1] * inv, 8.0 * b[2] * inv};
}

Jet cutoff_chi(double x) {
    const Jet s = smooth_step(-x);
    return Jet{s[0], -s[1], s[2], -s[3]};
}

Antiderivative::Antiderivative(std::function<double(double)> g, double a, double b, int panels)
    : g_(std::move(g)), a_(a), b_(b), h_((b - a) / panels), cum_(panels + 1, 0.0) {
    if (!(b > a) || panels < 1) throw std::invalid_argument("Antiderivative: bad interval");
    for (int k = 0; k < panels; ++k) cum_[k + 1] = cum_[k] + panel(a_ + k * h_, a_ + (k + 1) * h_);
}

double Antiderivative::panel(double lo, double hi) const { return gauss_legendre(g_, lo, hi); }

double Antiderivative::operator()(double t) const {
    if (t <= a_) return 0.0;
    if (t >= b_) return cum_.back();
    const int n = static_cast<int>(cum_.size()) - 1;
    int k = std::clamp(static_cast<int>((t - a_) / h_), 0, n - 1);
    const double lo = a_ + k * h_;
    if (t == lo) return cum_[k];
    return cum_[k] + panel(lo, t);
}

// ---------------------------------------------------------------------------

FHCurve make_fH(const FHParams& p) {
    const double l1 = p.lambda1, l2 = p.lambda2;
    if (!(l1 > 0.0 && l1 < l2 && l2 < 1.0)) throw std::invalid_argument("make_fH: need 0 < lambda1 < lambda2 < 1");
    if (!(p.delta > 0.0)) throw std::invalid_argument("make_fH: delta must be positive");
    if (!(p.t_max > 0.0)) throw std::invalid_argument("make_fH: t_max must be positive");
    const double low = l1 * (1.0 + l2) / (1.0 + l1);
    if (!(low < l2)) throw std::logic_error("make_fH: admissible slope interval is empty");
    const double lp = p.lambda_prime.value_or(0.5 * (low + l2));
    if (!(lp > low && lp < l2)) throw std::invalid_argument("make_fH: lambda' outside the admissible interval");
    const double A = l2 - lp;
    SmoothCurve f(Interval{-p.delta, p.t_max}, [A, lp](double t) {
        const double e = std::exp(-t);
        return Jet{A * (1.0 - e) + lp * t + 1.0, A * e + lp, -A * e, A * e};
    });
    return FHCurve{f, lp, low};
}

std::vector<Margin> fH_margins(const FHCurve& c, double lambda1, int n) {
    const auto ts = linspace(c.f.lo(), c.f.hi(), n);
    std::vector<Margin> out;
    out.push_back(scan_margin("fH_concave", ts, [&](double t) { return -c.f.eval(t, 2); }));
    out.push_back(scan_margin("fH_slope_above_lambda1", ts, [&](double t) { return c.f.eval(t, 1) - lambda1; }));
    out.push_back(scan_margin("fH_log_slope", ts, [&](double t) {
        const Jet j = c.f.jet(t);
        return j[1] / j[0] - lambda1 / (1.0 + lambda1 * t);
    }));
    Margin edge{"fH_slope_below_one_at_inner_end"};
    edge.update(1.0 - c.f.eval(c.f.lo(), 1), c.f.lo());
    out.push_back(edge);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct OdeNodes {
    double t0 = 0.0, H = 0.0, C = 0.0;
    bool log_axis = false;  // nodes uniform in tau = log(1 + t)
    std::vector<double> h, f, fp;
};

// value and first two derivatives of a t-jet with respect to the node axis
std::array<double, 3> axis_jet(const OdeNodes& n, double t, double y, double d1, double d2) {
    if (!n.log_axis) return {y, d1, d2};
    const double J = 1.0 + t;
    return {y, J * d1, J * d1 + J * J * d2};
}

double quintic_hermite(double s, double H, double y0, double d0, double dd0, double y1, double d1, double dd1) {
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    const double h00 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
    const double h10 = s - 6 * s3 + 8 * s4 - 3 * s5;
    const double h20 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5);
    const double h01 = 10 * s3 - 15 * s4 + 6 * s5;
    const double h11 = -4 * s3 + 7 * s4 - 3 * s5;
    const double h21 = 0.5 * (s3 - 2 * s4 + s5);
    return y0 * h00 + H * d0 * h10 + H * H * dd0 * h20 + y1 * h01 + H * d1 * h11 + H * H * dd1 * h21;
}

// derivative jets from the right-hand sides
Jet h0_jet(double h) {
    const double e = std::exp(-h * h);
    const double d1 = std::exp(-0.5 * h * h);
    return Jet{h, d1, -h * e, -d1 * e * (1.0 - 2.0 * h * h)};
}

Jet fC_jet(double C, double h, double f, double fp) {
    const double e = std::exp(-h * h);
    const double d1 = std::exp(-0.5 * h * h);
    return Jet{f, fp, C * e * f, C * e * (fp - 2.0 * h * d1 * f)};
}

struct Located {
    std::size_t i;
    double s;
};

Located locate(const OdeNodes& n, double t) {
    const std::size_t cells = n.h.size() - 1;
    double x = ((n.log_axis ? std::log1p(t) : t) - n.t0) / n.H;
    std::size_t i = static_cast<std::size_t>(std::clamp(std::floor(x), 0.0, static_cast<double>(cells - 1)));
    return Located{i, std::clamp(x - static_cast<double>(i), 0.0, 1.0)};
}

double node_t(const OdeNodes& n, std::size_t i) {
    const double x = n.t0 + static_cast<double>(i) * n.H;
    return n.log_axis ? std::expm1(x) : x;
}

double hermite(const OdeNodes& n, double s, std::size_t i, const Jet& a, const Jet& b, int k) {
    const auto A = axis_jet(n, node_t(n, i), a[k], a[k + 1], a[k + 2]);
    const auto B = axis_jet(n, node_t(n, i + 1), b[k], b[k + 1], b[k + 2]);
    return quintic_hermite(s, n.H, A[0], A[1], A[2], B[0], B[1], B[2]);
}

double interp_h(const OdeNodes& n, double t) {
    auto [i, s] = locate(n, t);
    return hermite(n, s, i, h0_jet(n.h[i]), h0_jet(n.h[i + 1]), 0);
}

std::pair<double, double> interp_f(const OdeNodes& n, double t) {
    auto [i, s] = locate(n, t);
    const Jet a = fC_jet(n.C, n.h[i], n.f[i], n.fp[i]);
    const Jet b = fC_jet(n.C, n.h[i + 1], n.f[i + 1], n.fp[i + 1]);
    return {hermite(n, s, i, a, b, 0), hermite(n, s, i, a, b, 1)};
}

// max |D y - dy| over nodes with sixth-order central / fourth-order one-sided differences
double derivative_residual(const std::vector<double>& y, const std::vector<double>& dy, double H) {
    const std::size_t n = y.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d;
        if (i >= 3 && i + 3 < n) {
            d = (-y[i - 3] + 9 * y[i - 2] - 45 * y[i - 1] + 45 * y[i + 1] - 9 * y[i + 2] + y[i + 3]) / (60 * H);
        } else if (i + 4 < n) {
            d = (-25 * y[i] + 48 * y[i + 1] - 36 * y[i + 2] + 16 * y[i + 3] - 3 * y[i + 4]) / (12 * H);
        } else {
            d = (25 * y[i] - 48 * y[i - 1] + 36 * y[i - 2] - 16 * y[i - 3] + 3 * y[i - 4]) / (12 * H);
        }
        worst = std::max(worst, std::abs(d - dy[i]));
    }
    return worst;
}

}  // namespace

namespace {

TransferODE integrate(double C, double t_max, int step_budget, double h0_initial, bool log_axis) {
    if (!(C >= 0.0)) throw std::invalid_argument("integrate_transfer_odes: C must be non-negative");
    if (!(t_max > 0.0)) throw std::invalid_argument("integrate_transfer_odes: t_max must be positive");
    if (!(h0_initial > 0.0)) throw std::invalid_argument("integrate_transfer_odes: h0(0) must be positive");
    if (step_budget < 8) throw BudgetExhausted("step budget exhausted before t_max (budget below 8 steps)");
    const double span = log_axis ? std::log1p(t_max) : t_max;
    const double H = span / step_budget;
    if (H > kMaxOdeStep) {
        std::ostringstream msg;
        msg << "step budget exhausted before t_max: step " << H << " exceeds " << kMaxOdeStep;
        throw BudgetExhausted(msg.str());
    }

    auto nodes = std::make_shared<OdeNodes>();
    nodes->H = H;
    nodes->C = C;
    nodes->log_axis = log_axis;
    const std::size_t N = static_cast<std::size_t>(step_budget) + 1;
    nodes->h.resize(N);
    nodes->f.resize(N);
    nodes->fp.resize(N);

    using State = std::array<double, 3>;
    // d/dx of the state, x = t or x = log(1 + t)
    auto rhs = [C, log_axis](double x, const State& y) {
        const double J = log_axis ? std::exp(x) : 1.0;
        return State{J * std::exp(-0.5 * y[0] * y[0]), J * y[2], J * C * std::exp(-y[0] * y[0]) * y[1]};
    };
    State y{h0_initial, 1.0, 0.0};
    for (std::size_t i = 0; i < N; ++i) {
        nodes->h[i] = y[0];
        nodes->f[i] = y[1];
        nodes->fp[i] = y[2];
        if (i + 1 == N) break;
        const double x = static_cast<double>(i) * H;
        const State k1 = rhs(x, y);
        State tmp;
        for (int j = 0; j < 3; ++j) tmp[j] = y[j] + 0.5 * H * k1[j];
        const State k2 = rhs(x + 0.5 * H, tmp);
        for (int j = 0; j < 3; ++j) tmp[j] = y[j] + 0.5 * H * k2[j];
        const State k3 = rhs(x + 0.5 * H, tmp);
        for (int j = 0; j < 3; ++j) tmp[j] = y[j] + H * k3[j];
        const State k4 = rhs(x + H, tmp);
        for (int j = 0; j < 3; ++j) y[j] += H / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    }

    TransferODE out;
    out.C = C;
    out.step = H;
    out.nodes.resize(N);
    for (std::size_t i = 0; i < N; ++i) out.nodes[i] = node_t(*nodes, i);
    out.nodes.back() = t_max;

    const Interval dom{0.0, t_max};
    std::shared_ptr<const OdeNodes> nc = nodes;
    out.h0 = SmoothCurve(dom, [nc](double t) { return h0_jet(interp_h(*nc, t)); }, Provenance::ode_defined);
    out.fC = SmoothCurve(
        dom,
        [nc](double t) {
            const double h = interp_h(*nc, t);
            auto [f, fp] = interp_f(*nc, t);
            return fC_jet(nc->C, h, f, fp);
        },
        Provenance::ode_defined);

    std::vector<double> dh(N), df(N), dfp(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double J = log_axis ? 1.0 + out.nodes[i] : 1.0;
        dh[i] = J * std::exp(-0.5 * nodes->h[i] * nodes->h[i]);
        df[i] = J * nodes->fp[i];
        dfp[i] = J * C * std::exp(-nodes->h[i] * nodes->h[i]) * nodes->f[i];
    }
    out.residual_h0 = derivative_residual(nodes->h, dh, H);
    out.residual_fC = derivative_residual(nodes->f, df, H);
    out.residual_dfC = derivative_residual(nodes->fp, dfp, H);
    return out;
}

}  // namespace

TransferODE integrate_transfer_odes(double C, double t_max, int step_budget, double h0_initial) {
    return integrate(C, t_max, step_budget, h0_initial, false);
}

TransferODE integrate_transfer_odes_log(double C, double t_max, int step_budget, double h0_initial) {
    return integrate(C, t_max, step_budget, h0_initial, true);
}

std::vector<Margin> transfer_properties(const TransferODE& ode) {
    std::vector<Margin> out;
    Margin fp{"fC_prime_positive"}, fpp{"fC_second_positive"}, hpp{"h0_second_negative"};
    Margin ratio{"ratio_in_unit_interval"}, mono{"fC_h0prime_nonincreasing"};
    for (std::size_t i = 0; i < ode.nodes.size(); ++i) {
        const double t = ode.nodes[i];
        const Jet h = ode.h0.jet(t), f = ode.fC.jet(t);
        if (i > 0) fp.update(f[1], t);
        fpp.update(f[2], t);
        hpp.update(-h[2], t);
        const double r = f[1] / (f[0] * h[0] * h[1]);
        ratio.update(std::min(r, 1.0 - r) + kNonstrictSlack, t);
        // d/dt (f_C h0') = h0' (f_C' - f_C h0 h0')
        mono.update(h[1] * (f[0] * h[0] * h[1] - f[1]) + kNonstrictSlack, t);
    }
    out.push_back(fp);
    out.push_back(fpp);
    out.push_back(hpp);
    out.push_back(ratio);
    out.push_back(mono);
    Margin decay{"fC_h0prime_decays"};
    const double v0 = ode.fC(0.0) * ode.h0.eval(0.0, 1);
    const double v1 = ode.fC(ode.nodes.back()) * ode.h0.eval(ode.nodes.back(), 1);
    decay.update(1.0 - v1 / v0, ode.nodes.back());
    out.push_back(decay);
    return out;
}

// ---------------------------------------------------------------------------

SmoothCurve smooth_join(const SmoothCurve& left, const SmoothCurve& right, Interval window,
                        std::optional<Interval> band, double tol) {
    const double a = window.lo, c = window.hi, W = c - a;
    if (!(W > 0.0)) throw std::invalid_argument("smooth_join: empty window");
    if (!left.domain().contains(a) || !left.domain().contains(c) || !right.domain().contains(a) ||
        !right.domain().contains(c))
        throw std::invalid_argument("smooth_join: window must lie in both domains");

    auto integral = std::make_shared<Antiderivative>(
        [left, right, a, W](double t) {
            return smooth_step((t - a) / W)[0] * (right.eval(t, 1) - left.eval(t, 1));
        },
        a, c, 128);
    const double delta = (right(c) - left(c)) - integral->total();

    SmoothCurve out(
        Interval{left.lo(), right.hi()},
        [left, right, a, c, W, integral, delta](double t) {
            if (t <= a) return left.jet(t);
            if (t >= c) return right.jet(t);
            const Jet L = left.jet(t), R = right.jet(t);
            const Jet s = smooth_step((t - a) / W);
            const double w = s[0], w1 = s[1] / W, w2 = s[2] / (W * W), w3 = s[3] / (W * W * W);
            const double D1 = R[1] - L[1], D2 = R[2] - L[2], D3 = R[3] - L[3];
            return Jet{L[0] + (*integral)(t) + w * delta, L[1] + w * D1 + w1 * delta,
                       L[2] + w1 * D1 + w * D2 + w2 * delta,
                       L[3] + w2 * D1 + 2.0 * w1 * D2 + w * D3 + w3 * delta};
        },
        Provenance::blended);

    if (band) {
        const double over = band_overshoot(out, window, *band);
        if (over > tol) {
            std::ostringstream msg;
            msg << "smooth_join: second derivative leaves band [" << band->lo << ", " << band->hi << "] by " << over;
            throw BandInfeasible(msg.str(), over);
        }
    }
    return out;
}

double band_overshoot(const SmoothCurve& c, Interval window, Interval band, int k, int samples) {
    double worst = 0.0;
    for (double t : linspace(window.lo, window.hi, samples)) {
        const double v = c.eval(t, k);
        worst = std::max({worst, band.lo - v, v - band.hi});
    }
    return worst;
}

SmoothCurve flatten_at(const SmoothCurve& c, double t0, double width, std::optional<double> t_end) {
    const double a = t0 - width;
    if (!(width > 0.0) || !c.domain().contains(a) || !c.domain().contains(t0))
        throw std::invalid_argument("flatten_at: flattening window outside the curve domain");
    const double end = t_end.value_or(c.hi());
    if (end < t0) throw std::invalid_argument("flatten_at: curve must extend to t0");
    // remaining weight 1 - S(u), evaluated as S(1-u) to keep the tail accurate
    auto keep = [a, width](double t) {
        const Jet s = smooth_step(1.0 - (t - a) / width);
        return Jet{s[0], -s[1] / width, s[2] / (width * width), -s[3] / (width * width * width)};
    };
    auto integral = std::make_shared<Antiderivative>([c, keep](double t) { return c.eval(t, 1) * keep(t)[0]; }, a,
                                                     t0, 128);
    const double base = c(a);
    return SmoothCurve(
        Interval{c.lo(), end},
        [c, a, t0, keep, integral, base](double t) {
            if (t <= a) return c.jet(t);
            if (t >= t0) return Jet{base + integral->total(), 0.0, 0.0, 0.0};
            const Jet x = c.jet(t), k = keep(t);
            return Jet{base + (*integral)(t), x[1] * k[0], x[2] * k[0] + x[1] * k[1],
                       x[3] * k[0] + 2.0 * x[2] * k[1] + x[1] * k[2]};
        },
        Provenance::blended);
}

// ---------------------------------------------------------------------------

std::string to_string(Parity p) { return p == Parity::odd ? "odd" : "even"; }

ParityReport parity_margin(const SmoothCurve& curve, double endpoint, Parity parity,
                           std::optional<double> first_derivative_target) {
    const Jet j = curve.jet(endpoint);
    ParityReport r;
    r.endpoint = endpoint;
    r.parity = parity;
    r.order_checked = 3;
    r.max_violation = parity == Parity::odd ? std::max(std::abs(j[0]), std::abs(j[2]))
                                            : std::max(std::abs(j[1]), std::abs(j[3]));
    r.first_derivative_value = j[1];
    r.first_derivative_target = first_derivative_target;
    if (first_derivative_target) r.target_deviation = std::abs(j[1] - *first_derivative_target);
    return r;
}

}  // namespace rb
