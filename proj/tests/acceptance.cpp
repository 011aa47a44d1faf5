// One line per acceptance criterion: "AC<n> PASS|FAIL <details>".  Exit code
// is non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "stochrob/landscape.hpp"
#include "stochrob/robustness.hpp"

using namespace stochrob;
using fixtures::Chain;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

PropertySet props_for(const Chain& c, const std::string& file) {
    return load_properties(fixtures::model_path(file), c.net);
}

// ---------------------------------------------------------------- AC1
Outcome state_spaces() {
    Chain bd = Chain::file("birth_death.model");
    Chain g1s = Chain::file("g1s.model");
    bool ok = bd.space.size() == 41 && g1s.space.size() == 1078 && g1s.m->num_transitions() == 5919;
    return {ok, fmt("birth-death %d states; G1/S %d states, %zu transitions", bd.space.size(), g1s.space.size(),
                    g1s.m->num_transitions())};
}

// ---------------------------------------------------------------- AC2
Outcome transient_oracle() {
    auto start = Clock::now();
    Chain c = Chain::file("birth_death.model");
    double worst = 0;
    for (double k1 : {0.1, 0.2, 0.3}) {
        Point p(1);
        p << k1;
        ConcreteMatrix chain = instantiate(*c.m, p);
        double q = kUniformizationMargin * chain.max_exit();
        Eigen::VectorXd init = Eigen::VectorXd::Unit(c.space.size(), 0);
        Eigen::VectorXd pi = forward(chain, q, init, 1000.0, 1e-6);
        Eigen::VectorXd ref = oracle::transient(oracle::generator(c.net, c.space, p), init, 1000.0);
        worst = std::max(worst, (pi - ref).cwiseAbs().maxCoeff());
    }
    double took = seconds_since(start);
    return {worst <= 1e-6 && took < 10.0, fmt("max entry error %.2e at eps 1e-6, %.2f s", worst, took)};
}

// ---------------------------------------------------------------- AC3
struct SandwichCase {
    std::string name;
    std::unique_ptr<Chain> chain;  // the matrix refers into it, so it must not move
    PropertySet props;
    std::vector<Box> boxes;
    double t;
    int observed;  // species for backward targets and mqd
};

int violations(const BoundedVector& b, const Eigen::VectorXd& v) {
    int bad = 0;
    for (int i = 0; i < v.size(); ++i)
        if (v[i] < b.lo[i] - 1e-9 || v[i] > b.hi[i] + 1e-9) ++bad;
    return bad;
}

Outcome sandwich() {
    auto start = Clock::now();
    std::vector<SandwichCase> cases;
    {
        auto c = std::make_unique<Chain>(load_model(fixtures::model_path("birth_death.model")));
        PropertySet p = parse_properties(R"(
reward busy { X >= 18 : 1; }
P=?[ X >= 8 U<=50 X >= 20 ]
R{busy}=?[ C<=50 ]
R{busy}=?[ I=50 ]
)",
                                         c->net);
        cases.push_back({"birth-death", std::move(c), std::move(p), {Box{Interval{0.1, 0.3}}, Box{Interval{0.18, 0.2}}}, 50.0, 0});
    }
    {
        auto c = std::make_unique<Chain>(parse_model(fixtures::random_network(2024)));
        PropertySet p = parse_properties(R"(
reward r { C >= 2 : 1; A = 0 : 0.3; }
P=?[ A >= 1 U<=3 C >= 3 ]
R{r}=?[ C<=3 ]
R{r}=?[ I=3 ]
)",
                                         c->net);
        cases.push_back({"random 3-species", std::move(c), std::move(p), {Box{Interval{0.2, 1.2}, Interval{0.5, 3.0}}, Box{Interval{0.5, 0.6}, Interval{1.0, 1.2}}},
                         3.0, 2});
    }
    {
        auto c = std::make_unique<Chain>(load_model(fixtures::model_path("signalling_small1.model")));
        PropertySet p = parse_properties(R"(
reward on { Rp >= 2 : 1; }
P=?[ R >= 5 U<=5 Rp >= 3 ]
R{on}=?[ C<=5 ]
R{on}=?[ I=5 ]
)",
                                         c->net);
        cases.push_back({"signalling (1089 states)", std::move(c), std::move(p),
                         {Box{Interval{2, 20}, Interval{0.1, 10}, Interval{0.1, 10}},
                          Box{Interval{10, 11}, Interval{3, 4}, Interval{3, 4}}}, 5.0, 3});
    }

    long checked = 0, bad = 0;
    std::mt19937_64 rng(42);
    for (auto& cs : cases) {
        const ParametricMatrix& m = *cs.chain->m;
        const int n = m.size();
        Eigen::VectorXd init = Eigen::VectorXd::Unit(n, 0);
        Eigen::VectorXd target = m.space().population(cs.observed);
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);
        for (const Box& box : cs.boxes) {
            const double q = *uniformization_rate(m, box);
            const double eps = 1e-6;
            const double mass = fox_glynn(q * cs.t, eps).total;
            BoundedVector fwd = param_forward(m, box, q, BoundedVector::exact(init), cs.t, eps);
            BoundedVector bwd = param_backward(m, box, q, BoundedVector::exact(target), cs.t, eps);
            Interval noise = mqd_bounds(fwd, target, mass);
            CheckOptions opt;
            opt.eps = eps;
            opt.q = q;
            Checker boxed(m, cs.props, box, opt);
            std::vector<std::vector<Interval>> ops;
            for (const auto& f : cs.props.formulas) ops.push_back(boxed.evaluate(*f, all));
            for (int k = 0; k < 20; ++k) {
                Point p = fixtures::sample(box, rng);
                ConcreteMatrix chain = instantiate(m, p);
                Eigen::VectorXd pi = forward(chain, q, init, cs.t, eps);
                bad += violations(fwd, pi);
                bad += violations(bwd, backward(chain, q, target, cs.t, eps));
                double v = mqd(pi, target);
                bad += v < noise.lo - 1e-9 || v > noise.hi + 1e-9;
                checked += 2L * n + 1;
                Checker point(m, cs.props, fixtures::point_box(p), opt);
                for (std::size_t fi = 0; fi < cs.props.formulas.size(); ++fi) {
                    auto exact = point.evaluate(*cs.props.formulas[fi], all);
                    for (int i = 0; i < n; ++i) {
                        ++checked;
                        bad += exact[i].lo < ops[fi][i].lo - 1e-9 || exact[i].hi > ops[fi][i].hi + 1e-9;
                    }
                }
            }
        }
    }
    return {bad == 0, fmt("%ld point/state checks over 3 models x 2 boxes x 20 points, %ld violations, %.1f s", checked,
                          bad, seconds_since(start))};
}

// ---------------------------------------------------------------- AC4
// Composite Simpson over `points` evaluations of f on [a, b].
double simpson(const std::function<double(double)>& f, double a, double b, int points) {
    const int n = points - 1;
    double h = (b - a) / n, s = 0;
    for (int i = 0; i <= n; ++i) s += f(a + i * h) * (i == 0 || i == n ? 1 : i % 2 ? 4 : 2);
    return s * h / 3 / (b - a);
}

double trapezoid(const std::function<double(double)>& f, double a, double b, int points) {
    const int n = points - 1;
    double h = (b - a) / n, s = 0;
    for (int i = 0; i <= n; ++i) s += f(a + i * h) * (i == 0 || i == n ? 0.5 : 1.0);
    return s * h / (b - a);
}

struct Study {
    std::string name;
    std::string model, props;
    int property;
    std::function<double(const Chain&, double)> exact;  // per-point oracle
};

Outcome refinement() {
    auto start = Clock::now();
    std::vector<Study> studies;
    studies.push_back({"birth-death", "birth_death.model", "birth_death.props", 0, [](const Chain& c, double k1) {
                           Point p(1);
                           p << k1;
                           Eigen::VectorXd pi = oracle::transient(oracle::generator(c.net, c.space, p),
                                                                  Eigen::VectorXd::Unit(c.space.size(), 0), 1000.0);
                           double s = 0;
                           for (int i = 0; i < c.space.size(); ++i) {
                               int x = c.space.state(i)[0];
                               if (x >= 15 && x <= 20) s += pi[i];
                           }
                           return s;
                       }});
    studies.push_back({"G1/S gamma_A slice", "g1s.model", "g1s.props", 0, [](const Chain& c, double ga) {
                           Point p(1);
                           p << ga;
                           ConcreteMatrix chain = instantiate(*c.m, p);
                           double q = kUniformizationMargin * chain.max_exit();
                           int b = *c.net.species_index("B");
                           Eigen::VectorXd rho(c.space.size());
                           for (int i = 0; i < c.space.size(); ++i) rho[i] = c.space.state(i)[b] < 3 ? 0.001 : 0.0;
                           return cumulative(chain, q, rho, 1000.0, 1e-10)[c.space.initial().front()];
                       }});
    bool ok = true;
    std::string detail;
    for (const auto& st : studies) {
        Chain c = Chain::file(st.model);
        PropertySet props = props_for(c, st.props);
        const Interval range = c.net.dims[0].range;
        auto f = [&](double x) { return st.exact(c, x); };
        double quad = simpson(f, range.lo, range.hi, 129);
        double trap17 = trapezoid(f, range.lo, range.hi, 17);
        for (double err : {0.05, 0.01}) {
            AnalysisConfig cfg;
            cfg.err = err;
            RobustnessResult r = analyze(*c.m, props, *props.formulas[st.property], cfg);
            bool good = r.status == Status::Success && r.err() <= err && r.r.contains(quad) && r.r.contains(trap17);
            ok = ok && good;
            detail += fmt("%s ERR=%.2f: [%.5f, %.5f] err %.4f, %zu boxes%s; ", st.name.c_str(), err, r.r.lo, r.r.hi,
                          r.err(), r.boxes.size(), good ? "" : " (FAILED)");
        }
        detail += fmt("%s reference: 17-point trapezoid %.5f, 129-point Simpson %.5f; ", st.name.c_str(), trap17, quad);
    }
    detail += fmt("%.1f s", seconds_since(start));
    return {ok, detail};
}

// ---------------------------------------------------------------- AC5
Outcome paper_trends() {
    auto start = Clock::now();
    auto robustness = [](double gb, int property) {
        Network net = load_model(fixtures::model_path("g1s.model"));
        net.fix("gB", gb);
        Chain c(std::move(net));
        PropertySet props = props_for(c, "g1s.props");
        AnalysisConfig cfg;
        cfg.err = 0.05;
        return analyze(*c.m, props, *props.formulas[property], cfg).r;
    };
    std::vector<double> low, high;
    for (double gb : {0.05, 0.10, 0.15}) {
        low.push_back(robustness(gb, 0).mid());
        high.push_back(robustness(gb, 1).mid());
    }
    Interval globally = robustness(0.10, 2);
    Interval reward = robustness(0.10, 0);
    bool a = low[0] < low[1] && low[1] < low[2];
    bool b = high[0] > high[1] && high[1] > high[2];
    bool c = reward.mid() > globally.mid();
    return {a && b && c,
            fmt("(a) low-mode reward over gamma_B 0.05/0.10/0.15: %.3f < %.3f < %.3f %s; (b) high-mode: %.3f > %.3f > "
                "%.3f %s; (c) reward %.3f vs G-formula %.3f %s; %.1f s",
                low[0], low[1], low[2], a ? "ok" : "NO", high[0], high[1], high[2], b ? "ok" : "NO", reward.mid(),
                globally.mid(), c ? "ok" : "NO", seconds_since(start))};
}

// ---------------------------------------------------------------- AC6
Outcome sigmoid_trend() {
    auto noise = [](const char* file, double n) {
        Chain c = Chain::file(file);
        PropertySet props = props_for(c, "sigmoid_bd.props");
        Point p(1);
        p << n;
        Checker checker(*c.m, props, fixtures::point_box(p));
        return checker.evaluate(*props.formulas[0], {c.space.initial().front()})[0].lo;
    };
    std::vector<double> narrow, wide;
    for (double n : {0.1, 4.0, 10.0}) {
        narrow.push_back(noise("sigmoid_bd.model", n));
        wide.push_back(noise("sigmoid_bd_wide.model", n));
    }
    bool mono = narrow[0] > narrow[1] && narrow[1] > narrow[2];
    double factor = wide[0] / narrow[0];
    bool wider = true;
    for (int i = 0; i < 3; ++i) wider = wider && wide[i] > narrow[i];
    bool ok = mono && wider && factor >= 1.5 && factor <= 3.5;
    return {ok, fmt("mqd at t=100 for n=0.1/4/10: %.3f > %.3f > %.3f; [20,40] vs [25,35]: %.3f/%.3f/%.3f, factor "
                    "%.2f at n=0.1 (%.2f, %.2f at n=4, 10)",
                    narrow[0], narrow[1], narrow[2], wide[0], wide[1], wide[2], factor, wide[1] / narrow[1],
                    wide[2] / narrow[2])};
}

// ---------------------------------------------------------------- AC7
Outcome determinism() {
    auto start = Clock::now();
    bool ok = true;
    std::string detail;
    for (auto [model, props_file, err] : {std::tuple{"birth_death.model", "birth_death.props", 0.01},
                                          std::tuple{"g1s.model", "g1s.props", 0.05}}) {
        Chain c = Chain::file(model);
        PropertySet props = props_for(c, props_file);
        std::string first;
        for (int threads : {1, 3, 8}) {
            AnalysisConfig cfg;
            cfg.err = err;
            cfg.threads = threads;
            std::string json = landscape_json(analyze(*c.m, props, *props.formulas[0], cfg));
            if (first.empty())
                first = json;
            else
                ok = ok && json == first;
        }
        detail += fmt("%s: %zu bytes identical for 1/3/8 threads; ", model, first.size());
    }
    detail += fmt("%.1f s", seconds_since(start));
    return {ok, detail};
}

// ---------------------------------------------------------------- AC8
Outcome signalling_protocol() {
    auto start = Clock::now();
    Chain phase1 = Chain::file("signalling_phase1.model");
    bool ok = phase1.space.size() == 121;
    std::string detail = fmt("phase 1: %d states; ", phase1.space.size());
    std::mt19937_64 rng(7);
    for (const char* model : {"signalling_model1.model", "signalling_model2.model"}) {
        Chain full = Chain::file(model);
        PropertySet props = props_for(full, "signalling.props");
        const int rp = props.posts.front().species;
        const Box box{Interval{10, 11}, Interval{3, 4}, Interval{3, 4}};  // S, nH, nR
        const Box box1{box[1], box[2]};           // nH, nR
        const double eps = 1e-6;
        const double q1 = *uniformization_rate(*phase1.m, box1);
        const double q2 = *uniformization_rate(*full.m, box);
        Eigen::VectorXd init1 = Eigen::VectorXd::Unit(phase1.space.size(), 0);

        BoundedVector b1 = param_forward(*phase1.m, box1, q1, BoundedVector::exact(init1), 100.0, eps);
        BoundedVector b2init{transfer(phase1.net, phase1.space, b1.lo, full.net, full.space),
                             transfer(phase1.net, phase1.space, b1.hi, full.net, full.space)};
        BoundedVector b2 = param_forward(*full.m, box, q2, b2init, 5.0, eps);
        const double mass = fox_glynn(q1 * 100.0, eps).total * fox_glynn(q2 * 5.0, eps).total;
        Eigen::VectorXd pop = full.space.population(rp);
        Interval bounds = mqd_bounds(b2, pop, mass);

        int bad = 0;
        double lo = INFINITY, hi = -INFINITY;
        for (int k = 0; k < 20; ++k) {
            Point p = fixtures::sample(box, rng);
            Point p1(2);
            p1 << p[1], p[2];
            Eigen::VectorXd pi1 = forward(instantiate(*phase1.m, p1), q1, init1, 100.0, eps);
            Eigen::VectorXd pi2 = forward(instantiate(*full.m, p), q2,
                                          transfer(phase1.net, phase1.space, pi1, full.net, full.space), 5.0, eps);
            double v = mqd(pi2, pop);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            bad += v < bounds.lo - 1e-9 || v > bounds.hi + 1e-9;
        }
        ok = ok && bad == 0 && full.space.size() == 116281;
        detail += fmt("%s (%d states): mqd(Rp) bounds [%.4f, %.4f], sampled [%.4f, %.4f], %d violations; ", model,
                      full.space.size(), bounds.lo, bounds.hi, lo, hi, bad);
    }
    detail += fmt("%.1f s", seconds_since(start));
    return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"AC1", state_spaces}, {"AC2", transient_oracle}, {"AC3", sandwich},    {"AC4", refinement},
        {"AC5", paper_trends}, {"AC6", sigmoid_trend},    {"AC7", determinism}, {"AC8", signalling_protocol},
    };
    int failed = 0;
    for (auto& [id, run] : criteria) {
        if (argc > 1 && std::string(argv[1]) != id) continue;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("%s %s %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed ? 1 : 0;
}
