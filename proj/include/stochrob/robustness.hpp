#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stochrob/csl.hpp"

namespace stochrob {

struct EvaluationSemantics {
    enum class Mode { Boolean, Relative, Absolute, Variance };
    enum class Aggregator { Min, Max, Avg };

    Mode mode = Mode::Absolute;
    Cmp op = Cmp::GreaterEq;
    std::optional<double> threshold;
    Aggregator agr = Aggregator::Avg;
    // Points where the system is considered non-functional; D is 0 there.
    std::vector<Box> nonviable;

    // "boolean", "relative", "absolute", "variance:min|max|avg"
    static EvaluationSemantics parse(std::string_view text);
    std::string name() const;
};

// D bounds for one box from Eval bounds.  Relative mode below the threshold
// divides by Eval and yields an infinite upper bound when Eval may be 0.
Interval apply_semantics(const EvaluationSemantics& sem, Interval eval, const Box& box = {});

// Largest Eval gap that keeps the D gap within `err`; infinite when Eval
// gaps do not translate into D gaps linearly.
double eval_tolerance(const EvaluationSemantics& sem, double err);

struct Subspace {
    Box box;
    std::string path;            // bisection choices from the root, '0' lower half
    std::vector<Interval> eval;  // per initial state
    std::vector<Interval> d;     // per initial state
    Interval d_mean;             // uniform average over initial states
    bool at_floor = false;

    // Fraction of the perturbation space; every split halves it exactly.
    double weight() const { return std::ldexp(1.0, -static_cast<int>(path.size())); }
    double max_gap() const;
};

struct AnalysisConfig {
    double err = 0.01;
    double eps = 1e-6;
    EvaluationSemantics semantics;
    std::vector<int> initial;  // empty: the model's initial state
    std::size_t max_boxes = 100000;
    double time_limit = std::numeric_limits<double>::infinity();  // seconds
    double min_size = 1e-6;  // relative to the original width
    int threads = 1;
};

enum class Status { Success, Residual, Budget };
std::string to_string(Status s);

struct RobustnessResult {
    std::vector<std::string> dims;
    Box space;
    std::vector<Subspace> boxes;  // canonical order: sorted by path
    std::vector<int> initial;
    std::vector<Interval> per_state;
    Interval r;
    Status status = Status::Success;
    std::vector<int> violating;  // boxes with a gap above the requested err
    bool approximate = false;
    double requested_err = 0.0;
    std::string semantics;
    std::string formula;

    double err() const { return 0.5 * (r.hi - r.lo); }
    double estimate() const { return r.mid(); }
};

// Volume-weighted sum of per-box D bounds in canonical order.  `state`
// selects one initial state; -1 uses the averaged bounds.
Interval aggregate(std::span<const Subspace> boxes, int state = -1);

// Uniform mean over initial states.
Interval initial_state_average(std::span<const Interval> per_state);

// Bisect along the widest dimension relative to `space`.
std::pair<Subspace, Subspace> split(const Subspace& s, const Box& space);
// Whether no dimension is wider than min_size relative to `space`.
bool at_size_floor(const Box& box, const Box& space, double min_size);

RobustnessResult analyze(const ParametricMatrix& m, const PropertySet& props, const Formula& f,
                         const AnalysisConfig& cfg);

// Corner-tightened piecewise multilinear estimate.  Not a guaranteed bound.
struct PiecewiseEstimate {
    Interval r;
    bool conservative = false;
};
PiecewiseEstimate piecewise_linear(const RobustnessResult& res);

}  // namespace stochrob
