#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deque>
#include <random>
#include <set>

#include "oracles.hpp"
#include "stochrob/state_space.hpp"

using namespace stochrob;

namespace {

std::string model(const std::string& name) { return std::string(STOCHROB_MODELS) + "/" + name; }

// Depth-first closure written independently of the library's BFS.
std::set<std::vector<int>> closure(const Network& net) {
    std::set<std::vector<int>> seen{net.initial_state()};
    std::vector<std::vector<int>> stack{net.initial_state()};
    while (!stack.empty()) {
        auto s = stack.back();
        stack.pop_back();
        for (const auto& r : net.reactions) {
            auto t = s;
            bool ok = true;
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (s[i] < r.reactants[i]) ok = false;
                t[i] += r.products[i] - r.reactants[i];
                if (t[i] < net.species[i].min || t[i] > net.species[i].max) ok = false;
            }
            for (const auto& c : net.constraints) {
                int v = 0;
                for (std::size_t i = 0; i < t.size(); ++i) v += c.coeffs[i] * t[i];
                if (v < c.lo || v > c.hi) ok = false;
            }
            if (ok && seen.insert(t).second) stack.push_back(t);
        }
    }
    return seen;
}

}  // namespace

TEST_CASE("reference models have the expected sizes") {
    struct Case {
        const char* file;
        int states;
        std::size_t transitions;
    };
    for (Case c : {Case{"birth_death.model", 41, 80}, Case{"g1s.model", 1078, 5919},
                   Case{"signalling_phase1.model", 121, 440}}) {
        Network net = load_model(model(c.file));
        StateSpace space = enumerate(net);
        ParametricMatrix m(net, space);
        CAPTURE(c.file);
        CHECK(space.size() == c.states);
        CHECK(m.num_transitions() == c.transitions);
    }
}

TEST_CASE("enumeration agrees with an independent closure") {
    for (const char* f : {"g1s.model", "signalling_small1.model", "signalling_small2.model", "sigmoid_bd.model"}) {
        Network net = load_model(model(f));
        StateSpace space = enumerate(net);
        auto ref = closure(net);
        CAPTURE(f);
        REQUIRE(space.size() == static_cast<int>(ref.size()));
        for (int i = 0; i < space.size(); ++i) {
            auto s = space.state(i);
            CHECK(ref.count(std::vector<int>(s.begin(), s.end())) == 1);
            CHECK(space.find(s) == i);
        }
        CHECK(space.initial().front() == 0);
    }
}

TEST_CASE("state limit is enforced") {
    Network net = load_model(model("g1s.model"));
    CHECK_THROWS_AS(enumerate(net, {}, 100), StateLimitExceeded);
}

TEST_CASE("extra initial states seed the closure") {
    Network net = parse_model("species X bound 5 init 0\nreaction up: X -> 2 X @ mass_action(1)");
    CHECK(enumerate(net).size() == 1);
    std::vector<std::vector<int>> extra{{1}};
    StateSpace s = enumerate(net, extra);
    CHECK(s.size() == 6);
    CHECK(s.initial().size() == 2);
}

TEST_CASE("instantiated chain matches the dense generator") {
    Network net = load_model(model("signalling_small1.model"));
    StateSpace space = enumerate(net);
    ParametricMatrix m(net, space);
    Point p(3);
    p << 7.0, 2.5, 6.0;
    ConcreteMatrix c = instantiate(m, p);
    Eigen::MatrixXd Q = oracle::generator(net, space, p);
    Eigen::MatrixXd R = Eigen::MatrixXd(c.rates);
    for (int i = 0; i < space.size(); ++i) {
        CHECK(c.exit[i] == doctest::Approx(-Q(i, i)).epsilon(1e-12));
        R(i, i) = Q(i, i);
    }
    CHECK((R - Q).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("transition rate ranges and the uniformization rate cover the box") {
    Network net = load_model(model("signalling_small2.model"));
    StateSpace space = enumerate(net);
    ParametricMatrix m(net, space);
    Box box = net.space();
    double q = *uniformization_rate(m, box);
    std::mt19937 rng(3);
    for (int k = 0; k < 20; ++k) {
        Point p(3);
        for (int d = 0; d < 3; ++d) p[d] = std::uniform_real_distribution<>(box[d].lo, box[d].hi)(rng);
        ConcreteMatrix c = instantiate(m, p);
        CHECK(c.max_exit() <= q);
        for (std::size_t e = 0; e < m.entries().size(); e += 37) {
            Interval r = m.rate_range(m.entries()[e], box);
            double v = m.rate(m.entries()[e], p);
            CHECK(v >= r.lo - 1e-12);
            CHECK(v <= r.hi + 1e-12);
        }
    }
    CHECK(q == doctest::Approx(kUniformizationMargin * max_exit_rate(m, box)));
}

TEST_CASE("absorbing states lose their outgoing transitions") {
    Network net = load_model(model("birth_death.model"));
    StateSpace space = enumerate(net);
    ParametricMatrix m(net, space);
    Point p(1);
    p << 0.2;
    ConcreteMatrix c = instantiate(m, p);
    std::vector<char> absorbing(space.size(), 0);
    absorbing[0] = 1;
    ConcreteMatrix a = make_absorbing(c, absorbing);
    CHECK(a.exit[0] == 0.0);
    CHECK(a.rates.row(0).sum() == 0.0);
    CHECK(a.exit[1] == c.exit[1]);
}

TEST_CASE("transfer maps distributions between networks by species name") {
    Network small = load_model(model("signalling_phase1.model"));
    Network big = load_model(model("signalling_model1.model"));
    StateSpace from = enumerate(small);
    StateSpace to = enumerate(big);
    Eigen::VectorXd d = Eigen::VectorXd::Constant(from.size(), 1.0 / from.size());
    Eigen::VectorXd out = transfer(small, from, d, big, to);
    CHECK(out.sum() == doctest::Approx(1.0));
    int hp = *big.species_index("Hp");
    for (int i = 0; i < to.size(); ++i)
        if (out[i] > 0) CHECK(to.state(i)[hp] == 0);
    // mass outside the target is an error
    Network tiny = parse_model("species H in [29, 31] init 30\nspecies R in [29, 31] init 30");
    StateSpace tspace = enumerate(tiny);
    CHECK_THROWS(transfer(small, from, d, tiny, tspace));
}
