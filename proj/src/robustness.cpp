#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "stochrob/robustness.hpp"

namespace stochrob {

EvaluationSemantics EvaluationSemantics::parse(std::string_view text) {
    EvaluationSemantics s;
    if (text == "boolean")
        s.mode = Mode::Boolean;
    else if (text == "relative")
        s.mode = Mode::Relative;
    else if (text == "absolute")
        s.mode = Mode::Absolute;
    else if (text == "variance" || text == "variance:avg")
        s.mode = Mode::Variance;
    else if (text == "variance:min") {
        s.mode = Mode::Variance;
        s.agr = Aggregator::Min;
    } else if (text == "variance:max") {
        s.mode = Mode::Variance;
        s.agr = Aggregator::Max;
    } else
        throw std::invalid_argument("unknown semantics '" + std::string(text) + "'");
    return s;
}

std::string EvaluationSemantics::name() const {
    switch (mode) {
        case Mode::Boolean: return "boolean";
        case Mode::Relative: return "relative";
        case Mode::Absolute: return "absolute";
        case Mode::Variance:
            return agr == Aggregator::Min ? "variance:min" : agr == Aggregator::Max ? "variance:max" : "variance:avg";
    }
    return "absolute";
}

namespace {

bool upward(Cmp op) { return op == Cmp::GreaterEq || op == Cmp::Greater; }

// 1: box inside some region, 0: disjoint from all, -1: partial overlap.
int nonviable_cover(const std::vector<Box>& regions, const Box& box) {
    if (box.empty()) return 0;
    int result = 0;
    for (const auto& r : regions) {
        bool inside = true, meets = true;
        for (std::size_t i = 0; i < box.size() && i < r.size(); ++i) {
            if (box[i].lo < r[i].lo || box[i].hi > r[i].hi) inside = false;
            if (box[i].hi < r[i].lo || box[i].lo > r[i].hi) meets = false;
        }
        if (inside) return 1;
        if (meets) result = -1;
    }
    return result;
}

}  // namespace

Interval apply_semantics(const EvaluationSemantics& sem, Interval eval, const Box& box) {
    Interval d = eval;
    switch (sem.mode) {
        case EvaluationSemantics::Mode::Boolean: {
            if (!sem.threshold) throw std::invalid_argument("boolean semantics needs a threshold");
            double r = *sem.threshold;
            bool all = compare(eval.lo, sem.op, r) && compare(eval.hi, sem.op, r);
            bool none = !compare(eval.lo, sem.op, r) && !compare(eval.hi, sem.op, r);
            // Comparisons are monotone, so checking both ends decides the box.
            d = all ? Interval{1, 1} : none ? Interval{0, 0} : Interval{0, 1};
            break;
        }
        case EvaluationSemantics::Mode::Relative: {
            if (!sem.threshold || *sem.threshold <= 0) throw std::invalid_argument("relative semantics needs r > 0");
            double r = *sem.threshold;
            if (upward(sem.op))
                d = {eval.lo / r, eval.hi / r};
            else
                d = {eval.hi > 0 ? r / eval.hi : std::numeric_limits<double>::infinity(),
                     eval.lo > 0 ? r / eval.lo : std::numeric_limits<double>::infinity()};
            break;
        }
        case EvaluationSemantics::Mode::Absolute:
        case EvaluationSemantics::Mode::Variance:
            break;
    }
    switch (nonviable_cover(sem.nonviable, box)) {
        case 1: return {0, 0};
        case -1: return {std::min(d.lo, 0.0), std::max(d.hi, 0.0)};
        default: return d;
    }
}

double eval_tolerance(const EvaluationSemantics& sem, double err) {
    switch (sem.mode) {
        case EvaluationSemantics::Mode::Absolute:
            return err;
        case EvaluationSemantics::Mode::Relative:
            if (upward(sem.op) && sem.threshold) return err * *sem.threshold;
            return std::numeric_limits<double>::infinity();
        default:
            return std::numeric_limits<double>::infinity();
    }
}

double Subspace::max_gap() const {
    double g = 0;
    for (const auto& i : d) g = std::max(g, i.hi - i.lo);
    return g;
}

std::string to_string(Status s) {
    switch (s) {
        case Status::Success: return "success";
        case Status::Residual: return "residual";
        case Status::Budget: return "budget";
    }
    return "success";
}

Interval aggregate(std::span<const Subspace> boxes, int state) {
    double lo = 0, hi = 0;
    for (const auto& b : boxes) {
        const Interval& d = state < 0 ? b.d_mean : b.d[state];
        lo += b.weight() * d.lo;
        hi += b.weight() * d.hi;
    }
    return {lo, hi};
}

Interval initial_state_average(std::span<const Interval> per_state) {
    if (per_state.empty()) throw std::invalid_argument("no initial states");
    double lo = 0, hi = 0;
    for (const auto& r : per_state) {
        lo += r.lo;
        hi += r.hi;
    }
    double n = static_cast<double>(per_state.size());
    return {lo / n, hi / n};
}

bool at_size_floor(const Box& box, const Box& space, double min_size) {
    for (std::size_t i = 0; i < box.size(); ++i) {
        double full = space[i].width();
        if (full > 0 && box[i].width() / full > min_size) return false;
    }
    return true;
}

std::pair<Subspace, Subspace> split(const Subspace& s, const Box& space) {
    int dim = -1;
    double widest = 0;
    for (std::size_t i = 0; i < s.box.size(); ++i) {
        double full = space[i].width();
        if (full <= 0) continue;
        double w = s.box[i].width() / full;
        if (w > widest) {
            widest = w;
            dim = static_cast<int>(i);
        }
    }
    if (dim < 0) throw std::logic_error("cannot split a point box");
    Subspace a, b;
    a.box = b.box = s.box;
    double mid = s.box[dim].mid();
    a.box[dim].hi = mid;
    b.box[dim].lo = mid;
    a.path = s.path + '0';
    b.path = s.path + '1';
    return {std::move(a), std::move(b)};
}

namespace {

template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
    int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex guard;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(guard);
                    if (!failure) failure = std::current_exception();
                    next = n;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

RobustnessResult analyze(const ParametricMatrix& m, const PropertySet& props, const Formula& f,
                         const AnalysisConfig& cfg) {
    if (!(cfg.err > 0)) throw std::invalid_argument("ERR must be positive");
    if (!(cfg.eps > 0 && cfg.eps < 1)) throw std::invalid_argument("eps must lie in (0,1)");
    if (!(cfg.min_size > 0)) throw std::invalid_argument("minimum box size must be positive");
    if (cfg.threads < 1) throw std::invalid_argument("thread count must be at least 1");

    const Network& net = m.network();
    RobustnessResult res;
    res.space = net.space();
    for (const auto& d : net.dims) res.dims.push_back(d.name);
    res.initial = cfg.initial.empty() ? m.space().initial() : cfg.initial;
    for (int s : res.initial)
        if (s < 0 || s >= m.size()) throw std::out_of_range("initial state outside the state space");
    res.requested_err = cfg.err;
    res.formula = f.text;

    EvaluationSemantics sem = cfg.semantics;
    if (!sem.threshold && f.bound) {
        sem.threshold = f.bound->value;
        sem.op = f.bound->op;
    }
    if (!f.quantitative() && sem.mode != EvaluationSemantics::Mode::Absolute) {
        // A state formula already yields 0/1; score it as is.
        sem.mode = EvaluationSemantics::Mode::Absolute;
    }
    if (sem.mode == EvaluationSemantics::Mode::Boolean && !sem.threshold)
        throw std::invalid_argument("boolean semantics needs a threshold");
    if (sem.mode == EvaluationSemantics::Mode::Relative && (!sem.threshold || *sem.threshold <= 0))
        throw std::invalid_argument("relative semantics needs a positive threshold");
    res.semantics = sem.name();
    const bool variance = sem.mode == EvaluationSemantics::Mode::Variance;
    res.approximate = variance;

    const double q = uniformization_rate(m, res.space).value_or(1.0);
    const double tol = eval_tolerance(sem, cfg.err);
    const std::size_t n_init = res.initial.size();

    auto gap = [&](const Subspace& s) {
        double g = 0;
        for (const auto& e : variance ? s.eval : s.d) g = std::max(g, e.hi - e.lo);
        return g;
    };

    // Returns false when the run was cut short by the refinement trigger.
    auto evaluate = [&](Subspace& s, bool watch) {
        CheckOptions opt;
        opt.eps = cfg.eps;
        opt.q = q;
        opt.trigger_err = watch ? tol : std::numeric_limits<double>::infinity();
        Checker checker(m, props, s.box, opt);
        try {
            s.eval = checker.evaluate(f, res.initial);
        } catch (const RefinementRequired&) {
            return false;
        }
        s.d.resize(n_init);
        for (std::size_t i = 0; i < n_init; ++i) {
            s.d[i] = variance ? s.eval[i] : apply_semantics(sem, s.eval[i], s.box);
            if (s.at_floor && !std::isfinite(s.d[i].hi))
                throw std::domain_error("relative semantics: Eval lower bound reaches 0 at the size floor");
        }
        return true;
    };

    const auto start = std::chrono::steady_clock::now();
    auto out_of_time = [&] {
        std::chrono::duration<double> el = std::chrono::steady_clock::now() - start;
        return el.count() > cfg.time_limit;
    };

    std::vector<Subspace> done, queue(1);
    queue[0].box = res.space;
    std::size_t leaves = 1;
    bool budget = false;
    while (!queue.empty()) {
        if (out_of_time()) budget = true;
        for (auto& s : queue) s.at_floor = s.at_floor || at_size_floor(s.box, res.space, cfg.min_size);
        std::vector<char> ok(queue.size());
        parallel_for(queue.size(), cfg.threads,
                     [&](std::size_t i) { ok[i] = evaluate(queue[i], !budget && !queue[i].at_floor); });

        std::vector<Subspace> next;
        std::vector<std::size_t> redo;
        for (std::size_t i = 0; i < queue.size(); ++i) {
            Subspace& s = queue[i];
            bool wants = !ok[i] || gap(s) > cfg.err;
            if (!wants || s.at_floor) {
                done.push_back(std::move(s));
                continue;
            }
            if (budget || leaves + 1 > cfg.max_boxes) {
                budget = true;
                if (!ok[i]) redo.push_back(done.size());
                done.push_back(std::move(s));
                continue;
            }
            auto [a, b] = split(s, res.space);
            next.push_back(std::move(a));
            next.push_back(std::move(b));
            ++leaves;
        }
        parallel_for(redo.size(), cfg.threads, [&](std::size_t i) { evaluate(done[redo[i]], false); });
        if (budget) {
            // Whatever is still pending is finished without further splits.
            parallel_for(next.size(), cfg.threads, [&](std::size_t i) { evaluate(next[i], false); });
            for (auto& s : next) done.push_back(std::move(s));
            next.clear();
        }
        queue = std::move(next);
    }

    std::sort(done.begin(), done.end(), [](const Subspace& a, const Subspace& b) { return a.path < b.path; });

    if (variance) {
        for (std::size_t i = 0; i < n_init; ++i) {
            double x = 0;
            if (sem.agr == EvaluationSemantics::Aggregator::Avg) {
                for (const auto& s : done) x += s.weight() * s.eval[i].mid();
            } else {
                x = done.front().eval[i].mid();
                for (const auto& s : done)
                    x = sem.agr == EvaluationSemantics::Aggregator::Min ? std::min(x, s.eval[i].mid())
                                                                        : std::max(x, s.eval[i].mid());
            }
            for (auto& s : done) {
                const Interval& e = s.eval[i];
                double near = x < e.lo ? e.lo - x : x > e.hi ? x - e.hi : 0.0;
                double far = std::max(std::abs(e.lo - x), std::abs(e.hi - x));
                s.d[i] = apply_semantics(sem, {near * near, far * far}, s.box);
            }
        }
    }

    for (std::size_t k = 0; k < done.size(); ++k) {
        Subspace& s = done[k];
        s.d_mean = initial_state_average(s.d);
        if (gap(s) > cfg.err) res.violating.push_back(static_cast<int>(k));
    }
    for (std::size_t i = 0; i < n_init; ++i) res.per_state.push_back(aggregate(done, static_cast<int>(i)));
    res.r = initial_state_average(res.per_state);
    res.boxes = std::move(done);
    res.status = budget ? Status::Budget : res.violating.empty() ? Status::Success : Status::Residual;
    return res;
}

PiecewiseEstimate piecewise_linear(const RobustnessResult& res) {
    PiecewiseEstimate out;
    out.conservative = false;
    std::vector<int> live;
    for (std::size_t i = 0; i < res.space.size(); ++i)
        if (res.space[i].width() > 0) live.push_back(static_cast<int>(i));
    const std::size_t corners = std::size_t{1} << live.size();

    auto contains = [&](const Box& b, const std::vector<double>& p) {
        for (std::size_t k = 0; k < live.size(); ++k)
            if (!b[live[k]].contains(p[k])) return false;
        return true;
    };

    std::vector<double> p(live.size());
    double lo = 0, hi = 0;
    for (const auto& box : res.boxes) {
        double sum_lo = 0, sum_hi = 0;
        for (std::size_t c = 0; c < corners; ++c) {
            for (std::size_t k = 0; k < live.size(); ++k) {
                const Interval& iv = box.box[live[k]];
                p[k] = (c >> k) & 1 ? iv.hi : iv.lo;
            }
            double up = box.d_mean.hi, down = box.d_mean.lo;
            for (const auto& other : res.boxes) {
                if (!contains(other.box, p)) continue;
                up = std::min(up, other.d_mean.hi);
                down = std::max(down, other.d_mean.lo);
            }
            if (down > up) down = up = 0.5 * (down + up);
            sum_lo += down;
            sum_hi += up;
        }
        double n = static_cast<double>(corners);
        lo += box.weight() * sum_lo / n;
        hi += box.weight() * sum_hi / n;
    }
    out.r = {lo, hi};
    return out;
}

}  // namespace stochrob
