#include <algorithm>
#include <array>
#include <cmath>

#include "stochrob/param_transient.hpp"

namespace stochrob {

namespace {
constexpr std::size_t kAffineDims = 8;
}

bool refine_trigger(const BoundedVector& cur, double err, Sweep sweep, const std::vector<char>& mask) {
    if (sweep == Sweep::Forward) return cur.hi.sum() - cur.lo.sum() > err;
    for (int s = 0; s < cur.size(); ++s) {
        if (!mask.empty() && !mask[s]) continue;
        if (cur.hi[s] - cur.lo[s] > err) return true;
    }
    return false;
}

BoxRates::BoxRates(const ParametricMatrix& m, const Box& box) : m_(&m), box_(box) {
    const auto& entries = m.entries();
    const Network& net = m.network();
    info_.resize(entries.size());
    Point probe(box.size());
    for (std::size_t d = 0; d < box.size(); ++d) probe[d] = box[d].lo;
    for (std::size_t e = 0; e < entries.size(); ++e) {
        const Transition& t = entries[e];
        const Reaction& r = net.reactions[t.reaction];
        auto state = m.space().state(t.src);
        Info& info = info_[e];
        info.range = rate_bounds(r, box, state);
        info.trend_begin = static_cast<int>(trends_.size());
        for (int d : rate_dims(r)) {
            Trend tr = box[d].degenerate() ? Trend::Flat : rate_trend(r, box, state, d);
            if (tr != Trend::Flat) trends_.push_back({d, tr});
        }
        info.trend_end = static_cast<int>(trends_.size());
        int moving = info.trend_end - info.trend_begin;
        if (moving == 0 || info.range.degenerate()) {
            info.shape = Shape::Fixed;
            info.value = info.range.lo;
            trends_.resize(info.trend_begin);
            info.trend_end = info.trend_begin;
        } else if (moving == 1 && linear_in(r, trends_[info.trend_begin].dim)) {
            info.shape = Shape::Linear;
            info.dim = trends_[info.trend_begin].dim;
            Point unit = probe;
            unit[info.dim] = 1.0;
            info.value = eval_rate(r, unit, state);
        } else {
            info.shape = Shape::General;
        }
    }
    affine_ = box.size() <= kAffineDims;
    for (const Info& info : info_)
        if (info.shape == Shape::General) affine_ = false;
    if (affine_) {
        affine_form_.reserve(info_.size());
        for (const Info& info : info_)
            affine_form_.push_back(info.shape == Shape::Fixed ? Affine{info.value, 0.0, -1}
                                                              : Affine{0.0, info.value, info.dim});
    }
}

namespace {

struct Scratch {
    std::vector<double> coef;
    std::vector<signed char> dir;
    std::vector<char> active;
    std::vector<char> conflict;
    std::vector<int> touched;
    Point corner;

    void prepare(std::size_t dims) {
        if (coef.size() != dims) {
            coef.assign(dims, 0.0);
            dir.assign(dims, 0);
            active.assign(dims, 0);
            conflict.assign(dims, 0);
            corner.resize(static_cast<Eigen::Index>(dims));
        }
    }
    void touch(int d) {
        if (std::find(touched.begin(), touched.end(), d) == touched.end()) touched.push_back(d);
    }
    void reset() {
        for (int d : touched) {
            coef[d] = 0.0;
            dir[d] = 0;
            active[d] = 0;
            conflict[d] = 0;
        }
        touched.clear();
    }
};

thread_local Scratch scratch;

int sign_of(double w) { return (w > 0) - (w < 0); }

}  // namespace

double BoxRates::maximize(std::span<const Term> terms) const {
    Scratch& ws = scratch;
    ws.prepare(box_.size());
    double sum = 0.0;
    bool general = false;
    for (const Term& t : terms) {
        if (info_[t.entry].shape == Shape::General) {
            general = true;
            break;
        }
    }
    if (!general) {
        for (const Term& t : terms) {
            const Info& in = info_[t.entry];
            if (in.shape == Shape::Fixed) {
                sum += t.weight * in.value;
            } else {
                ws.touch(in.dim);
                ws.coef[in.dim] += t.weight * in.value;
            }
        }
        for (int d : ws.touched) sum += ws.coef[d] > 0 ? ws.coef[d] * box_[d].hi : ws.coef[d] * box_[d].lo;
        ws.reset();
        return sum;
    }

    // Dimensions reached by a non-linear rate need a joint direction.
    for (const Term& t : terms) {
        const Info& in = info_[t.entry];
        if (in.shape != Shape::General) continue;
        for (int k = in.trend_begin; k < in.trend_end; ++k) {
            int d = trends_[k].dim;
            if (!ws.active[d]) {
                if (std::find(ws.touched.begin(), ws.touched.end(), d) == ws.touched.end()) ws.touched.push_back(d);
                ws.active[d] = 1;
            }
        }
    }
    auto vote = [&](int d, Trend tr, double w) {
        if (!ws.active[d] || ws.conflict[d]) return;
        if (tr == Trend::Mixed) {
            ws.conflict[d] = 1;
            return;
        }
        int s = static_cast<int>(tr) * sign_of(w);
        if (s == 0) return;
        if (ws.dir[d] == 0)
            ws.dir[d] = static_cast<signed char>(s);
        else if (ws.dir[d] != s)
            ws.conflict[d] = 1;
    };
    for (const Term& t : terms) {
        const Info& in = info_[t.entry];
        if (in.shape == Shape::Linear)
            vote(in.dim, Trend::Up, t.weight);
        else if (in.shape == Shape::General)
            for (int k = in.trend_begin; k < in.trend_end; ++k) vote(trends_[k].dim, trends_[k].trend, t.weight);
    }
    for (std::size_t d = 0; d < box_.size(); ++d) ws.corner[d] = box_[d].lo;
    for (int d : ws.touched)
        if (ws.active[d] && !ws.conflict[d]) ws.corner[d] = ws.dir[d] > 0 ? box_[d].hi : box_[d].lo;

    const auto& entries = m_->entries();
    for (const Term& t : terms) {
        const Info& in = info_[t.entry];
        bool relaxed = false;
        if (in.shape == Shape::Linear) {
            relaxed = ws.conflict[in.dim];
        } else if (in.shape == Shape::General) {
            for (int k = in.trend_begin; k < in.trend_end && !relaxed; ++k) relaxed = ws.conflict[trends_[k].dim];
        }
        if (relaxed) {
            sum += t.weight > 0 ? t.weight * in.range.hi : t.weight * in.range.lo;
            continue;
        }
        switch (in.shape) {
            case Shape::Fixed:
                sum += t.weight * in.value;
                break;
            case Shape::Linear:
                if (ws.active[in.dim]) {
                    sum += t.weight * in.value * ws.corner[in.dim];
                } else {
                    ws.touch(in.dim);
                    ws.coef[in.dim] += t.weight * in.value;
                }
                break;
            case Shape::General:
                sum += t.weight * m_->rate(entries[t.entry], ws.corner);
                break;
        }
    }
    for (int d : ws.touched)
        if (!ws.active[d]) sum += ws.coef[d] > 0 ? ws.coef[d] * box_[d].hi : ws.coef[d] * box_[d].lo;
    ws.reset();
    return sum;
}

double BoxRates::minimize(std::span<const Term> terms) const {
    thread_local std::vector<Term> neg;
    neg.assign(terms.begin(), terms.end());
    for (Term& t : neg) t.weight = -t.weight;
    return -maximize(neg);
}

Interval BoxRates::weighted_bounds(std::span<const Term> terms) const {
    return {minimize(terms), maximize(terms)};
}

namespace {

struct MassBounds {
    double lo;
    double hi;
};

// Lower and upper pass over affine rates in one sweep of the entries.
struct AffinePair {
    double base_lo = 0, base_hi = 0;
    std::array<double, kAffineDims> c_lo{}, c_hi{};

    void add(const BoxRates::Affine& a, double w_lo, double w_hi) {
        base_lo += w_lo * a.value;
        base_hi += w_hi * a.value;
        if (a.dim >= 0) {
            c_lo[a.dim] += w_lo * a.slope;
            c_hi[a.dim] += w_hi * a.slope;
        }
    }
    double lower(const Box& b) const {
        double v = base_lo;
        for (std::size_t d = 0; d < b.size(); ++d) v += c_lo[d] > 0 ? c_lo[d] * b[d].lo : c_lo[d] * b[d].hi;
        return v;
    }
    double upper(const Box& b) const {
        double v = base_hi;
        for (std::size_t d = 0; d < b.size(); ++d) v += c_hi[d] > 0 ? c_hi[d] * b[d].hi : c_hi[d] * b[d].lo;
        return v;
    }
};

void forward_step(const BoxRates& rates, double q, const BoundedVector& cur, BoundedVector& out,
                  const MassBounds& mass) {
    const ParametricMatrix& m = rates.matrix();
    const auto& entries = m.entries();
    const int n = cur.size();
    out.lo.resize(n);
    out.hi.resize(n);
    thread_local std::vector<BoxRates::Term> terms;
    const auto& af = rates.affine_entries();
    for (int s = 0; s < n; ++s) {
        if (rates.affine()) {
            AffinePair acc;
            for (int e : m.incoming(s)) {
                int src = entries[e].src;
                acc.add(af[e], cur.lo[src] / q, cur.hi[src] / q);
            }
            const double own_lo = -cur.lo[s] / q, own_hi = -cur.hi[s] / q;
            for (int e = m.out_begin(s); e < m.out_begin(s + 1); ++e) acc.add(af[e], own_lo, own_hi);
            out.lo[s] = cur.lo[s] + acc.lower(rates.box());
            out.hi[s] = cur.hi[s] + acc.upper(rates.box());
            continue;
        }
        for (int pass = 0; pass < 2; ++pass) {
            const Eigen::VectorXd& x = pass ? cur.hi : cur.lo;
            terms.clear();
            for (int e : m.incoming(s)) {
                double w = x[entries[e].src] / q;
                if (w != 0.0) terms.push_back({e, w});
            }
            double own = -x[s] / q;
            if (own != 0.0)
                for (int e = m.out_begin(s); e < m.out_begin(s + 1); ++e) terms.push_back({e, own});
            if (pass)
                out.hi[s] = x[s] + rates.maximize(terms);
            else
                out.lo[s] = x[s] + rates.minimize(terms);
        }
    }
    // Probability mass is conserved by every chain in the box.
    double sum_lo = out.lo.sum();
    double sum_hi = out.hi.sum();
    double cap = std::min(1.0, mass.hi);
    for (int s = 0; s < n; ++s) {
        double hi = std::min({out.hi[s], cap, mass.hi - (sum_lo - out.lo[s])});
        double lo = std::max({out.lo[s], 0.0, mass.lo - (sum_hi - out.hi[s])});
        out.hi[s] = std::max(hi, 0.0);
        out.lo[s] = std::min(lo, out.hi[s]);
    }
}

void backward_step(const BoxRates& rates, double q, const BoundedVector& cur, BoundedVector& out,
                   const std::vector<char>& absorbing, double floor, double ceil) {
    const ParametricMatrix& m = rates.matrix();
    const auto& entries = m.entries();
    const int n = cur.size();
    out.lo.resize(n);
    out.hi.resize(n);
    thread_local std::vector<BoxRates::Term> terms;
    for (int s = 0; s < n; ++s) {
        if (!absorbing.empty() && absorbing[s]) {
            out.lo[s] = cur.lo[s];
            out.hi[s] = cur.hi[s];
            continue;
        }
        if (rates.affine()) {
            const auto& af = rates.affine_entries();
            AffinePair acc;
            for (int e = m.out_begin(s); e < m.out_begin(s + 1); ++e) {
                int dst = entries[e].dst;
                acc.add(af[e], (cur.lo[dst] - cur.lo[s]) / q, (cur.hi[dst] - cur.hi[s]) / q);
            }
            out.lo[s] = std::max(floor, cur.lo[s] + acc.lower(rates.box()));
            out.hi[s] = std::min(ceil, cur.hi[s] + acc.upper(rates.box()));
            if (out.lo[s] > out.hi[s]) out.lo[s] = out.hi[s];
            continue;
        }
        for (int pass = 0; pass < 2; ++pass) {
            const Eigen::VectorXd& x = pass ? cur.hi : cur.lo;
            terms.clear();
            for (int e = m.out_begin(s); e < m.out_begin(s + 1); ++e) {
                double w = (x[entries[e].dst] - x[s]) / q;
                if (w != 0.0) terms.push_back({e, w});
            }
            if (pass)
                out.hi[s] = std::min(ceil, x[s] + rates.maximize(terms));
            else
                out.lo[s] = std::max(floor, x[s] + rates.minimize(terms));
        }
        if (out.lo[s] > out.hi[s]) out.lo[s] = out.hi[s];
    }
}

void check_rate(const ParametricMatrix& m, const Box& box, double q) {
    if (max_exit_rate(m, box) > q * (1 + 1e-12))
        throw std::invalid_argument("uniformization rate below the maximal exit rate of the box");
}

// Would the accumulated gap exceed err if later iterates were no tighter
// than the current one?
bool projected_trigger(const BoundedVector& acc, const BoundedVector& cur, double remaining, double err,
                       Sweep sweep, const std::vector<char>& mask) {
    BoundedVector proj{acc.lo + remaining * cur.lo, acc.hi + remaining * cur.hi};
    return refine_trigger(proj, err, sweep, mask);
}

}  // namespace

BoundedVector step_bounds(const BoxRates& rates, double q, const BoundedVector& cur, Sweep sweep,
                          const std::vector<char>& absorbing) {
    BoundedVector out;
    if (sweep == Sweep::Forward) {
        forward_step(rates, q, cur, out, {cur.lo.sum(), cur.hi.sum()});
    } else {
        double floor = cur.lo.size() ? cur.lo.minCoeff() : 0.0;
        double ceil = cur.hi.size() ? cur.hi.maxCoeff() : 0.0;
        backward_step(rates, q, cur, out, absorbing, floor, ceil);
    }
    return out;
}

BoundedVector param_forward(const ParametricMatrix& m, const Box& box, double q, const BoundedVector& init,
                            double t, double eps, const TriggerSpec& trigger) {
    if (t == 0.0) return init;
    check_rate(m, box, q);
    BoxRates rates(m, box);
    StepWeights sw = step_weights(q, t, eps, Weighting::Poisson);
    MassBounds mass{init.lo.sum(), init.hi.sum()};
    const int n = init.size();
    BoundedVector cur = init, next;
    BoundedVector acc{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
    const int last = static_cast<int>(sw.w.size()) - 1;
    double remaining = 0.0;
    for (double w : sw.w) remaining += w;
    const bool watch = std::isfinite(trigger.err);
    for (int i = 0; i <= last; ++i) {
        if (i >= sw.first) {
            acc.lo += sw.w[i] * cur.lo;
            acc.hi += sw.w[i] * cur.hi;
            remaining -= sw.w[i];
        }
        if (i == last) break;
        forward_step(rates, q, cur, next, mass);
        std::swap(cur, next);
        if (watch && projected_trigger(acc, cur, std::max(remaining, 0.0), trigger.err, Sweep::Forward, {}))
            throw RefinementRequired();
    }
    return acc;
}

BoundedVector param_backward(const ParametricMatrix& m, const Box& box, double q, const BoundedVector& seed,
                             double t, double eps, Weighting weighting, const std::vector<char>& absorbing,
                             const TriggerSpec& trigger) {
    const int n = seed.size();
    if (t == 0.0) {
        if (weighting == Weighting::Mixed) return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
        return seed;
    }
    check_rate(m, box, q);
    BoxRates rates(m, box);
    StepWeights sw = step_weights(q, t, eps, weighting);
    double floor = n ? seed.lo.minCoeff() : 0.0;
    double ceil = n ? seed.hi.maxCoeff() : 0.0;
    BoundedVector cur = seed, next;
    BoundedVector acc{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
    const int last = static_cast<int>(sw.w.size()) - 1;
    double remaining = 0.0;
    for (double w : sw.w) remaining += w;
    const bool watch = std::isfinite(trigger.err);
    for (int i = 0; i <= last; ++i) {
        if (i >= sw.first) {
            acc.lo += sw.w[i] * cur.lo;
            acc.hi += sw.w[i] * cur.hi;
            remaining -= sw.w[i];
        }
        if (i == last) break;
        backward_step(rates, q, cur, next, absorbing, floor, ceil);
        std::swap(cur, next);
        if (watch && projected_trigger(acc, cur, std::max(remaining, 0.0), trigger.err, Sweep::Backward,
                                       trigger.mask))
            throw RefinementRequired();
    }
    return acc;
}

}  // namespace stochrob
