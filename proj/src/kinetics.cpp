#include <algorithm>
#include <cmath>

#include "stochrob/model.hpp"

namespace stochrob {

namespace {

double binomial(int n, int k) {
    if (k < 0 || n < k) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// X^n / (K^n + X^n), written to stay finite for large n.
double hill_fraction(double x, double K, double n) {
    if (x <= 0.0) return 0.0;
    return 1.0 / (1.0 + std::pow(K / x, n));
}

double sigmoid_factor(double x, double half, double n) {
    if (x <= 0.0) return 2.0;
    return 2.0 / (1.0 + std::pow(x / half, n));
}

double eval_kinetics(const Reaction& r, double k, double half, double n,
                     std::span<const int> state) {
    const Kinetics& kin = r.kinetics;
    switch (kin.kind) {
        case KineticsKind::MassAction:
            return k * propensity(r, state);
        case KineticsKind::Hill:
            if (propensity(r, state) == 0.0) return 0.0;
            return k * hill_fraction(regulator_level(kin, state), half, n);
        case KineticsKind::Sigmoid:
            if (propensity(r, state) == 0.0) return 0.0;
            return k * sigmoid_factor(regulator_level(kin, state), half, n);
    }
    return 0.0;
}

Trend combine(Trend a, Trend b) {
    if (a == Trend::Flat) return b;
    if (b == Trend::Flat || a == b) return a;
    return Trend::Mixed;
}

// Sign of d/dn of the Hill/sigmoid factor, given the sign of (x - half).
Trend coefficient_trend(const Kinetics& kin, double x, const Interval& half) {
    if (x <= 0.0) return Trend::Flat;
    if (half.degenerate() && half.lo == x) return Trend::Flat;
    Trend above;  // trend when x > half
    Trend below;
    if (kin.kind == KineticsKind::Hill) {
        above = Trend::Up;
        below = Trend::Down;
    } else {
        above = Trend::Down;
        below = Trend::Up;
    }
    if (half.hi <= x) return above;
    if (half.lo >= x) return below;
    return Trend::Mixed;
}

}  // namespace

bool Reaction::changes_state() const {
    for (int c : change)
        if (c != 0) return true;
    return false;
}

double propensity(const Reaction& r, std::span<const int> state) {
    double p = 1.0;
    for (std::size_t i = 0; i < r.reactants.size(); ++i) {
        if (r.reactants[i] == 0) continue;
        p *= binomial(state[i], r.reactants[i]);
        if (p == 0.0) return 0.0;
    }
    return p;
}

int regulator_level(const Kinetics& k, std::span<const int> state) {
    int x = 0;
    for (int s : k.regulator) x += state[s];
    return x;
}

double eval_rate(const Reaction& r, const Point& p, std::span<const int> state) {
    const Kinetics& k = r.kinetics;
    return eval_kinetics(r, k.rate.at(p), k.half.at(p), k.coeff.at(p), state);
}

Interval rate_bounds(const Reaction& r, const Box& box, std::span<const int> state) {
    const Kinetics& k = r.kinetics;
    // The rate is monotone in k and in the half-saturation constant over the
    // whole box, and monotone in n once those are fixed, so the extremes sit
    // on corners of the (k, half, n) box.
    Interval kr = k.rate.over(box);
    if (k.kind == KineticsKind::MassAction) {
        double c = propensity(r, state);
        return {kr.lo * c, kr.hi * c};
    }
    Interval hr = k.half.over(box);
    Interval nr = k.coeff.over(box);
    double lo = INFINITY, hi = -INFINITY;
    for (double kv : {kr.lo, kr.hi})
        for (double hv : {hr.lo, hr.hi})
            for (double nv : {nr.lo, nr.hi}) {
                double v = eval_kinetics(r, kv, hv, nv, state);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    return {lo, hi};
}

Trend rate_trend(const Reaction& r, const Box& box, std::span<const int> state, int dim) {
    const Kinetics& k = r.kinetics;
    if (propensity(r, state) == 0.0) return Trend::Flat;
    Trend t = Trend::Flat;
    if (k.rate.dim == dim) t = combine(t, Trend::Up);
    if (k.kind == KineticsKind::MassAction) return t;
    double x = regulator_level(k, state);
    if (k.half.dim == dim && x > 0.0) {
        // Hill falls as K grows; the sigmoid rises as x_half grows.
        if (k.kind == KineticsKind::Hill)
            t = combine(t, Trend::Down);
        else
            t = combine(t, Trend::Up);
    }
    if (k.coeff.dim == dim) t = combine(t, coefficient_trend(k, x, k.half.over(box)));
    if (t != Trend::Flat && k.rate.over(box).hi == 0.0) return Trend::Flat;
    return t;
}

bool linear_in(const Reaction& r, int dim) {
    const Kinetics& k = r.kinetics;
    if (k.rate.dim != dim) return false;
    if (k.kind == KineticsKind::MassAction) return true;
    return k.half.dim != dim && k.coeff.dim != dim;
}

std::vector<int> rate_dims(const Reaction& r) {
    std::vector<int> dims;
    const Kinetics& k = r.kinetics;
    for (const ParamRef* p : {&k.rate, &k.half, &k.coeff}) {
        if (k.kind == KineticsKind::MassAction && p != &k.rate) continue;
        if (p->perturbed() && std::find(dims.begin(), dims.end(), p->dim) == dims.end())
            dims.push_back(p->dim);
    }
    return dims;
}

}  // namespace stochrob
