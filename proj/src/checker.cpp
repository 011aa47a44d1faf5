#include <cmath>
#include <stdexcept>

#include "stochrob/csl.hpp"

namespace stochrob {

SatBounds SatBounds::negated() const {
    SatBounds out;
    out.yes.resize(maybe.size());
    out.maybe.resize(yes.size());
    for (std::size_t i = 0; i < yes.size(); ++i) {
        out.yes[i] = !maybe[i];
        out.maybe[i] = !yes[i];
    }
    return out;
}

namespace {

std::vector<char> all_states(int n) { return std::vector<char>(n, 1); }

bool all_degenerate(const Box& b) {
    for (const auto& i : b)
        if (!i.degenerate()) return false;
    return true;
}

BoundedVector exact_pair(const std::vector<char>& set) {
    Eigen::VectorXd v = indicator(set);
    return {v, v};
}

}  // namespace

Checker::Checker(const ParametricMatrix& m, const PropertySet& props, const Box& box, CheckOptions opt)
    : m_(m), props_(props), box_(box), opt_(opt) {
    q_ = opt_.q > 0 ? opt_.q : uniformization_rate(m, box).value_or(1.0);
    concrete_ = all_degenerate(box);
    if (concrete_) {
        point_.resize(box.size());
        for (std::size_t i = 0; i < box.size(); ++i) point_[i] = box[i].lo;
        chain_ = instantiate(m, point_);
    }
}

std::vector<char> Checker::focus_mask(const std::vector<int>& focus) const {
    if (focus.empty()) return {};
    std::vector<char> mask(m_.size(), 0);
    for (int s : focus) mask[s] = 1;
    return mask;
}

BoundedVector Checker::backward_run(const BoundedVector& seed, double t, Weighting w,
                                    const std::vector<char>& absorbing, const std::vector<char>& mask, bool watch) {
    if (concrete_) {
        ConcreteMatrix c = absorbing.empty() ? chain_ : make_absorbing(chain_, absorbing);
        auto run = [&](const Eigen::VectorXd& v) {
            return w == Weighting::Mixed ? cumulative(c, q_, v, t, opt_.eps) : backward(c, q_, v, t, opt_.eps);
        };
        Eigen::VectorXd lo = run(seed.lo);
        Eigen::VectorXd hi = seed.hi == seed.lo ? lo : run(seed.hi);
        return {lo, hi};
    }
    TriggerSpec trig;
    if (watch) {
        trig.err = opt_.trigger_err;
        trig.mask = mask;
    }
    return param_backward(m_, box_, q_, seed, t, opt_.eps, w, absorbing, trig);
}

BoundedVector Checker::distribution(int state, double t) {
    Eigen::VectorXd init = Eigen::VectorXd::Zero(m_.size());
    init[state] = 1.0;
    if (concrete_) {
        Eigen::VectorXd pi = forward(chain_, q_, init, t, opt_.eps);
        return {pi, pi};
    }
    TriggerSpec trig;
    trig.err = opt_.trigger_err;
    return param_forward(m_, box_, q_, BoundedVector::exact(init), t, opt_.eps, trig);
}

SatBounds Checker::satisfy(const Formula& f) {
    const int n = m_.size();
    switch (f.kind) {
        case Formula::Kind::True:
            return {all_states(n), all_states(n)};
        case Formula::Kind::Atom: {
            auto s = label(m_.space(), f.atom);
            return {s, s};
        }
        case Formula::Kind::Not:
            return satisfy(*f.left).negated();
        case Formula::Kind::And:
        case Formula::Kind::Or: {
            SatBounds a = satisfy(*f.left);
            SatBounds b = satisfy(*f.right);
            bool both = f.kind == Formula::Kind::And;
            for (int i = 0; i < n; ++i) {
                a.yes[i] = both ? (a.yes[i] && b.yes[i]) : (a.yes[i] || b.yes[i]);
                a.maybe[i] = both ? (a.maybe[i] && b.maybe[i]) : (a.maybe[i] || b.maybe[i]);
            }
            return a;
        }
        default:
            break;
    }
    if (!f.bound) throw std::invalid_argument("quantitative operator '=?' used inside a formula");
    BoundedVector v = values(f);
    SatBounds out{std::vector<char>(n), std::vector<char>(n)};
    const Bound& b = *f.bound;
    for (int i = 0; i < n; ++i) {
        double lo = v.lo[i], hi = v.hi[i];
        switch (b.op) {
            case Cmp::GreaterEq:
                out.yes[i] = lo >= b.value;
                out.maybe[i] = hi >= b.value;
                break;
            case Cmp::Greater:
                out.yes[i] = lo > b.value;
                out.maybe[i] = hi > b.value;
                break;
            case Cmp::LessEq:
                out.yes[i] = hi <= b.value;
                out.maybe[i] = lo <= b.value;
                break;
            case Cmp::Less:
                out.yes[i] = hi < b.value;
                out.maybe[i] = lo < b.value;
                break;
            default:
                throw std::invalid_argument("unsupported comparison in operator bound");
        }
    }
    return out;
}

BoundedVector Checker::values(const Formula& f, const std::vector<int>& focus) {
    const int n = m_.size();
    std::vector<char> mask = focus_mask(focus);
    switch (f.kind) {
        case Formula::Kind::Prob:
            if (f.path == Formula::Path::Next) return next(f);
            return until(f, mask);
        case Formula::Kind::RewardCum:
        case Formula::Kind::RewardInst: {
            const RewardStructure* r = props_.reward(f.name);
            if (!r) throw std::invalid_argument("unknown reward structure '" + f.name + "'");
            Eigen::VectorXd rho = r->rates(m_.space());
            Weighting w = f.kind == Formula::Kind::RewardCum ? Weighting::Mixed : Weighting::Poisson;
            return backward_run({rho, rho}, f.t_hi, w, {}, mask, true);
        }
        case Formula::Kind::Expect: {
            std::vector<int> states = focus;
            if (states.empty())
                for (int i = 0; i < n; ++i) states.push_back(i);
            return expectation(f, states);
        }
        default:
            throw std::invalid_argument("not a quantitative operator");
    }
}

BoundedVector Checker::until(const Formula& f, const std::vector<char>& mask) {
    const int n = m_.size();
    const bool globally = f.path == Formula::Path::Globally;
    // G[a,b] phi is the complement of true U[a,b] !phi.
    SatBounds s1 = globally ? SatBounds{all_states(n), all_states(n)} : satisfy(*f.left);
    SatBounds s2 = globally ? satisfy(*f.right).negated() : satisfy(*f.right);
    const double a = f.t_lo, b = f.t_hi;

    auto side = [&](const std::vector<char>& keep, const std::vector<char>& goal) {
        BoundedVector v = exact_pair(goal);
        if (b - a > 0) {
            // Leave through !keep or by reaching goal; both stop the clock.
            std::vector<char> absorbing(n);
            for (int i = 0; i < n; ++i) absorbing[i] = !keep[i] || goal[i];
            v = backward_run(v, b - a, Weighting::Poisson, absorbing, mask, a == 0);
            // Goal states hold at once; don't let window truncation shave them.
            for (int i = 0; i < n; ++i)
                if (goal[i]) v.lo[i] = v.hi[i] = 1.0;
        }
        if (a > 0) {
            std::vector<char> absorbing(n);
            for (int i = 0; i < n; ++i) {
                absorbing[i] = !keep[i];
                if (!keep[i]) v.lo[i] = v.hi[i] = 0.0;
            }
            v = backward_run(v, a, Weighting::Poisson, absorbing, mask, true);
        }
        return v;
    };

    BoundedVector out;
    if (s1.yes == s1.maybe && s2.yes == s2.maybe) {
        out = side(s1.yes, s2.yes);
    } else {
        BoundedVector upper = side(s1.maybe, s2.maybe);
        BoundedVector lower = side(s1.yes, s2.yes);
        out = {lower.lo, upper.hi};
    }
    if (globally) {
        Eigen::VectorXd lo = (1.0 - out.hi.array()).matrix();
        Eigen::VectorXd hi = (1.0 - out.lo.array()).matrix();
        out = {lo.cwiseMax(0.0), hi.cwiseMin(1.0)};
    }
    return out;
}

BoundedVector Checker::next(const Formula& f) {
    const int n = m_.size();
    SatBounds target = satisfy(*f.right);
    BoxRates rates(m_, box_);
    const auto& entries = m_.entries();
    BoundedVector out{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
    std::vector<BoxRates::Term> in, rest;
    auto ratio = [](double a, double b) { return a + b > 0 ? a / (a + b) : 0.0; };
    for (int s = 0; s < n; ++s) {
        for (int pass = 0; pass < 2; ++pass) {
            const std::vector<char>& set = pass ? target.maybe : target.yes;
            in.clear();
            rest.clear();
            for (int e = m_.out_begin(s); e < m_.out_begin(s + 1); ++e)
                (set[entries[e].dst] ? in : rest).push_back({e, 1.0});
            Interval num = rates.weighted_bounds(in);
            Interval other = rates.weighted_bounds(rest);
            if (pass)
                out.hi[s] = ratio(num.hi, other.lo);
            else
                out.lo[s] = ratio(num.lo, other.hi);
        }
        if (out.lo[s] > out.hi[s]) out.lo[s] = out.hi[s];
    }
    return out;
}

BoundedVector Checker::expectation(const Formula& f, const std::vector<int>& states) {
    const PostFunction* post = props_.post(f.name);
    if (!post) throw std::invalid_argument("unknown post-processing function '" + f.name + "'");
    const int n = m_.size();
    const double t = f.t_hi;
    const double mass = t > 0 ? fox_glynn(q_ * t, opt_.eps).total : 1.0;
    Eigen::VectorXd pop = m_.space().population(post->species);
    BoundedVector out{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
    for (int s : states) {
        BoundedVector d = distribution(s, t);
        Interval v = concrete_ ? Interval{mqd(d.lo, pop), mqd(d.lo, pop)} : mqd_bounds(d, pop, mass);
        out.lo[s] = v.lo;
        out.hi[s] = v.hi;
    }
    return out;
}

std::vector<Interval> Checker::evaluate(const Formula& f, const std::vector<int>& initial) {
    std::vector<Interval> out;
    out.reserve(initial.size());
    if (f.quantitative()) {
        BoundedVector v = values(f, initial);
        for (int s : initial) out.push_back({v.lo[s], v.hi[s]});
        return out;
    }
    SatBounds sat = satisfy(f);
    for (int s : initial) {
        if (sat.yes[s])
            out.push_back({1.0, 1.0});
        else if (!sat.maybe[s])
            out.push_back({0.0, 0.0});
        else
            out.push_back({0.0, 1.0});
    }
    return out;
}

}  // namespace stochrob
