#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "stochrob/state_space.hpp"
#include "stochrob/transient.hpp"

namespace stochrob {

// Entry-wise bounds on a probability or value vector valid for every point of
// a parameter box.
struct BoundedVector {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    static BoundedVector exact(const Eigen::VectorXd& v) { return {v, v}; }
    int size() const { return static_cast<int>(lo.size()); }
};

enum class Sweep { Forward, Backward };

// Thrown when bounds grow past the refinement threshold mid-computation.
class RefinementRequired : public std::runtime_error {
public:
    RefinementRequired() : std::runtime_error("bounds too wide, box must be split") {}
};

// Forward: total gap sum(hi) - sum(lo) above err.  Backward: some state in
// `mask` (all states when empty) with hi - lo above err.
bool refine_trigger(const BoundedVector& cur, double err, Sweep sweep, const std::vector<char>& mask = {});

// Rate of every transition as a function over one box, classified so that
// weighted sums of rates can be extremized cheaply.
class BoxRates {
public:
    enum class Shape : std::uint8_t { Fixed, Linear, General };

    BoxRates(const ParametricMatrix& m, const Box& box);

    struct Term {
        int entry;
        double weight;
    };

    // Bounds on sum(weight * rate) over the box.  Exact unless a dimension
    // drives terms in opposite directions, in which case the terms touching
    // it are bounded one by one.
    Interval weighted_bounds(std::span<const Term> terms) const;
    double maximize(std::span<const Term> terms) const;
    double minimize(std::span<const Term> terms) const;

    // Every rate is constant or linear in a single dimension over the box.
    bool affine() const { return affine_; }
    struct Affine {
        double value;  // constant part
        double slope;
        int dim;  // -1 when constant
    };
    const std::vector<Affine>& affine_entries() const { return affine_form_; }

    Shape shape(int entry) const { return info_[entry].shape; }
    Interval range(int entry) const { return info_[entry].range; }
    const ParametricMatrix& matrix() const { return *m_; }
    const Box& box() const { return box_; }

private:
    struct Info {
        Shape shape = Shape::Fixed;
        int dim = -1;
        double value = 0.0;  // the rate (Fixed) or its slope (Linear)
        Interval range;
        int trend_begin = 0;
        int trend_end = 0;
    };
    struct DimTrend {
        int dim;
        Trend trend;
    };
    const ParametricMatrix* m_;
    Box box_;
    std::vector<Info> info_;
    std::vector<DimTrend> trends_;
    bool affine_ = false;
    std::vector<Affine> affine_form_;
};

struct TriggerSpec {
    double err = std::numeric_limits<double>::infinity();
    std::vector<char> mask;  // backward only; empty means every state
};

// One uniformized step applied to bounds, forward or backward.  Backward
// steps leave `absorbing` states unchanged.
BoundedVector step_bounds(const BoxRates& rates, double q, const BoundedVector& cur, Sweep sweep,
                          const std::vector<char>& absorbing = {});

BoundedVector param_forward(const ParametricMatrix& m, const Box& box, double q, const BoundedVector& init,
                            double t, double eps, const TriggerSpec& trigger = {});

BoundedVector param_backward(const ParametricMatrix& m, const Box& box, double q, const BoundedVector& seed,
                             double t, double eps, Weighting weighting = Weighting::Poisson,
                             const std::vector<char>& absorbing = {}, const TriggerSpec& trigger = {});

}  // namespace stochrob
