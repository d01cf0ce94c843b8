#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "riccibench/curve.hpp"
#include "riccibench/report.hpp"

namespace rb {

// ---- bump and step --------------------------------------------------------

// exp(1 - 1/(1-x^2)) on (-1,1), zero outside; jet in x
Jet bump(double x);
// C-infinity step on [0,1]: 0 for u<=0, 1 for u>=1, derivative proportional to bump(2u-1).
// Both tails are computed directly so small values keep relative accuracy.
Jet smooth_step(double u);
// chi(x) = 1 on (-inf,-1], 0 on [0,inf), decreasing in between
Jet cutoff_chi(double x);

// Piecewise Gauss-Legendre antiderivative of g on [a,b], G(a)=0.
class Antiderivative {
public:
    Antiderivative(std::function<double(double)> g, double a, double b, int panels = 256);
    double operator()(double t) const;
    double total() const { return cum_.back(); }

private:
    std::function<double(double)> g_;
    double a_, b_, h_;
    std::vector<double> cum_;
    double panel(double lo, double hi) const;
};

// ---- warping function of the collar ----------------------------------------

struct FHParams {
    double lambda1 = 0.5;
    double lambda2 = 0.7;
    double delta = 0.1;
    double t_max = 20.0;
    std::optional<double> lambda_prime;  // default: midpoint of the admissible interval
};

struct FHCurve {
    SmoothCurve f;
    double lambda_prime = 0.0;
    double lambda_low = 0.0;  // lambda1 (1+lambda2) / (1+lambda1)
};

// f(t) = (lambda2 - lambda')(1 - e^{-t}) + lambda' t + 1 on [-delta, t_max]
FHCurve make_fH(const FHParams& p);

// concavity, slope > lambda1, log-slope bound, and f'(-delta) < 1, on an n-point grid
std::vector<Margin> fH_margins(const FHCurve& c, double lambda1, int n = 2048);

// ---- ODE-defined warps of the transfer block ------------------------------

class BudgetExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TransferODE {
    SmoothCurve h0;
    SmoothCurve fC;
    double C = 0.0;
    double step = 0.0;
    std::vector<double> nodes;  // node abscissae
    // |discrete derivative of stored node values - ODE right-hand side|, max over nodes
    double residual_h0 = 0.0;
    double residual_fC = 0.0;   // f_C' consistency
    double residual_dfC = 0.0;  // f_C'' = C e^{-h0^2} f_C
};

inline constexpr double kDefaultH0 = 1.0;
inline constexpr int kDefaultStepBudget = 65536;
inline constexpr double kMaxOdeStep = 1e-2;

// Classical RK4 with fixed step t_max/step_budget; throws BudgetExhausted when that
// step exceeds kMaxOdeStep.
TransferODE integrate_transfer_odes(double C, double t_max, int step_budget = kDefaultStepBudget,
                                    double h0_initial = kDefaultH0);

// Same system with nodes uniform in tau = log(1 + t); the budget bounds the tau step.
// Residuals are measured in tau.
TransferODE integrate_transfer_odes_log(double C, double t_max, int step_budget = kDefaultStepBudget,
                                        double h0_initial = kDefaultH0);

// signs, limit proxy and ratio bound checked at every node
std::vector<Margin> transfer_properties(const TransferODE& ode);

// ---- smoothing -------------------------------------------------------------

class BandInfeasible : public std::runtime_error {
public:
    BandInfeasible(const std::string& what, double overshoot) : std::runtime_error(what), overshoot_(overshoot) {}
    double overshoot() const { return overshoot_; }

private:
    double overshoot_;
};

inline constexpr int kJoinCheckSamples = 2049;

// Blend left into right across window: equals left before it, right after it.
// The first derivative is the bump-weighted mix of the two slopes; the value mismatch
// that remains at the window end is absorbed by the step itself.
// Throws BandInfeasible when the second derivative leaves band by more than tol.
SmoothCurve smooth_join(const SmoothCurve& left, const SmoothCurve& right, Interval window,
                        std::optional<Interval> second_derivative_band = std::nullopt, double tol = 0.0);

// max excursion of the k-th derivative outside band over the window (0 when inside)
double band_overshoot(const SmoothCurve& c, Interval window, Interval band, int k = 2,
                      int samples = kJoinCheckSamples);

// Replace c on [t0-width, t0] so that every derivative vanishes at t0; constant after t0
// up to c's right end (or t_end when given).
SmoothCurve flatten_at(const SmoothCurve& c, double t0, double width, std::optional<double> t_end = std::nullopt);

// ---- parity at collapse endpoints -----------------------------------------

enum class Parity { odd, even };
std::string to_string(Parity p);

struct ParityReport {
    double endpoint = 0.0;
    Parity parity = Parity::odd;
    int order_checked = 3;
    double max_violation = 0.0;
    double first_derivative_value = 0.0;
    std::optional<double> first_derivative_target;
    double target_deviation = 0.0;
    bool passes(double tol) const { return max_violation < tol && target_deviation < tol; }
};

ParityReport parity_margin(const SmoothCurve& curve, double endpoint, Parity parity,
                           std::optional<double> first_derivative_target = std::nullopt);

}  // namespace rb
