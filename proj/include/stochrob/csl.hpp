#pragma once

#include <limits>
#include <vector>

#include "stochrob/formula.hpp"
#include "stochrob/mqd.hpp"
#include "stochrob/param_transient.hpp"

namespace stochrob {

// Inner and outer approximation of a satisfaction set over a box.
struct SatBounds {
    std::vector<char> yes;    // satisfied at every point
    std::vector<char> maybe;  // satisfied at some point

    SatBounds negated() const;
};

struct CheckOptions {
    double eps = 1e-6;
    // Uniformization rate; when zero it is derived from the box.
    double q = 0.0;
    // Cancel with RefinementRequired once value gaps exceed this.
    double trigger_err = std::numeric_limits<double>::infinity();
};

// Evaluates formulas over one parameter box.  A box with every dimension
// degenerate is evaluated on the concrete chain.
class Checker {
public:
    Checker(const ParametricMatrix& m, const PropertySet& props, const Box& box, CheckOptions opt = {});

    SatBounds satisfy(const Formula& f);
    // Per-state bounds of a quantitative operator.  `focus` lists the states
    // whose gap drives refinement (all states when empty).
    BoundedVector values(const Formula& f, const std::vector<int>& focus = {});

    // Eval for each listed initial state: the operator value for a
    // quantitative formula, 0/1 for a boolean one.
    std::vector<Interval> evaluate(const Formula& f, const std::vector<int>& initial);

    // Forward bounds from one state, for E operators.
    BoundedVector distribution(int state, double t);

    double rate() const { return q_; }
    bool concrete() const { return concrete_; }

private:
    BoundedVector until(const Formula& f, const std::vector<char>& mask);
    BoundedVector next(const Formula& f);
    BoundedVector expectation(const Formula& f, const std::vector<int>& states);
    BoundedVector backward_run(const BoundedVector& seed, double t, Weighting w, const std::vector<char>& absorbing,
                               const std::vector<char>& mask, bool watch);
    std::vector<char> focus_mask(const std::vector<int>& focus) const;

    const ParametricMatrix& m_;
    const PropertySet& props_;
    Box box_;
    CheckOptions opt_;
    double q_ = 1.0;
    bool concrete_ = false;
    Point point_;
    ConcreteMatrix chain_;
};

}  // namespace stochrob
