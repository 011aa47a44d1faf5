#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "stochrob/model.hpp"

using namespace stochrob;

namespace {

const char* kToggle = R"(
# two species with every kinetic law
species X bound 6 init 2
species Y in [1, 5] init 3
param k in [0.5, 2]
param n in [0.5, 4]
const d = 0.1
reaction make: 0 -> X @ hill(k, 3, n; Y)
reaction grow: 0 -> Y @ sigmoid(0.3, n, 2.5)
reaction pair: 2 X -> Y @ mass_action(0.5*k)
reaction drop: Y -> 0 @ mass_action(d)
)";

std::string error_of(const std::string& src) {
    try {
        parse_model(src);
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("declarations are parsed") {
    Network net = parse_model(kToggle);
    REQUIRE(net.species.size() == 2);
    CHECK(net.species[0].max == 6);
    CHECK(net.species[1].min == 1);
    CHECK(net.species[1].init == 3);
    REQUIRE(net.dims.size() == 2);
    CHECK(net.dims[0].range == Interval{0.5, 2});
    CHECK(net.constant("d") == doctest::Approx(0.1));
    REQUIRE(net.reactions.size() == 4);
    const Reaction& pair = net.reactions[2];
    CHECK(pair.reactants[0] == 2);
    CHECK(pair.products[1] == 1);
    CHECK(pair.kinetics.rate.dim == 0);
    CHECK(pair.kinetics.rate.scale == doctest::Approx(0.5));
    // sigmoid defaults its regulator to the produced species
    CHECK(net.reactions[1].kinetics.regulator == std::vector<int>{1});
    CHECK(net.initial_state() == std::vector<int>{2, 3});
}

TEST_CASE("rates follow the kinetic laws") {
    Network net = parse_model(kToggle);
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        Point p(2);
        p[0] = std::uniform_real_distribution<>(0.5, 2)(rng);
        p[1] = std::uniform_real_distribution<>(0.5, 4)(rng);
        std::vector<int> s{std::uniform_int_distribution<>(0, 6)(rng), std::uniform_int_distribution<>(1, 5)(rng)};
        for (const auto& r : net.reactions) {
            bool enabled = true;
            for (std::size_t i = 0; i < s.size(); ++i) enabled = enabled && s[i] >= r.reactants[i];
            double expect = enabled ? oracle::rate(r, p, s) : 0.0;
            CHECK(eval_rate(r, p, s) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("mass action uses binomial propensities") {
    Network net = parse_model(kToggle);
    const Reaction& pair = net.reactions[2];
    std::vector<int> s{5, 1};
    CHECK(propensity(pair, s) == doctest::Approx(10.0));
    Point p(2);
    p << 1.0, 1.0;
    CHECK(eval_rate(pair, p, s) == doctest::Approx(5.0));
    s[0] = 1;
    CHECK(eval_rate(pair, p, s) == 0.0);
}

TEST_CASE("rate bounds enclose sampled rates and trends match finite differences") {
    Network net = parse_model(kToggle);
    std::mt19937 rng(11);
    Box box{{0.7, 1.4}, {1.0, 3.5}};
    for (int s0 = 0; s0 <= 6; ++s0)
        for (int s1 = 1; s1 <= 5; ++s1) {
            std::vector<int> s{s0, s1};
            for (const auto& r : net.reactions) {
                Interval b = rate_bounds(r, box, s);
                for (int k = 0; k < 30; ++k) {
                    Point p(2);
                    p[0] = std::uniform_real_distribution<>(box[0].lo, box[0].hi)(rng);
                    p[1] = std::uniform_real_distribution<>(box[1].lo, box[1].hi)(rng);
                    double v = eval_rate(r, p, s);
                    CHECK(v >= b.lo - 1e-12);
                    CHECK(v <= b.hi + 1e-12);
                }
                for (int d = 0; d < 2; ++d) {
                    Trend t = rate_trend(r, box, s, d);
                    if (t == Trend::Mixed) continue;
                    // sample pairs along dimension d
                    for (int k = 0; k < 10; ++k) {
                        Point a(2);
                        a[0] = std::uniform_real_distribution<>(box[0].lo, box[0].hi)(rng);
                        a[1] = std::uniform_real_distribution<>(box[1].lo, box[1].hi)(rng);
                        Point b2 = a;
                        a[d] = box[d].lo;
                        b2[d] = box[d].hi;
                        double diff = eval_rate(r, b2, s) - eval_rate(r, a, s);
                        if (t == Trend::Up) CHECK(diff >= -1e-12);
                        if (t == Trend::Down) CHECK(diff <= 1e-12);
                        if (t == Trend::Flat) CHECK(std::abs(diff) <= 1e-12);
                    }
                }
            }
        }
}

TEST_CASE("pretty printing round-trips") {
    Network net = parse_model(kToggle);
    Network again = parse_model(to_source(net));
    REQUIRE(again.reactions.size() == net.reactions.size());
    CHECK(to_source(again) == to_source(net));
    Point p(2);
    p << 1.3, 2.2;
    std::vector<int> s{3, 2};
    for (std::size_t i = 0; i < net.reactions.size(); ++i)
        CHECK(eval_rate(again.reactions[i], p, s) == doctest::Approx(eval_rate(net.reactions[i], p, s)));
}

TEST_CASE("fixing a parameter collapses its interval, fixing a constant rescales") {
    Network net = parse_model(kToggle);
    net.fix("k", 1.5);
    CHECK(net.space()[0] == Interval{1.5, 1.5});
    net.fix("d", 0.2);
    std::vector<int> s{0, 4};
    Point p = net.midpoint();
    CHECK(eval_rate(net.reactions[3], p, s) == doctest::Approx(0.8));
    CHECK_THROWS(net.fix("k", 9.0));
    CHECK_THROWS(net.fix("nope", 1.0));
}

TEST_CASE("constraints restrict admissible states") {
    Network net = parse_model(R"(
species A bound 4 init 1
species B bound 4 init 1
constraint A + B in [1, 3]
reaction ab: A -> B @ mass_action(1)
)");
    CHECK(net.admissible(std::vector<int>{1, 2}));
    CHECK_FALSE(net.admissible(std::vector<int>{2, 2}));
    CHECK_FALSE(net.admissible(std::vector<int>{0, 0}));
}

TEST_CASE("malformed models report their position") {
    CHECK(error_of("species X bound 3 init 1\nspecies X bound 2").find("2:") == 0);
    CHECK(error_of("species X bound 3 init 1\nspecies X bound 2").find("duplicate species") != std::string::npos);
    CHECK(error_of("species X bound 3 init 9").find("init out of bounds") != std::string::npos);
    CHECK(error_of("species X bound -1").find("") != std::string::npos);
    CHECK(error_of("species X bound 3\nreaction r: X -> Y @ mass_action(1)").find("unknown identifier 'Y'") !=
          std::string::npos);
    CHECK(error_of("param k in [2, 1]").find("empty interval") != std::string::npos);
    CHECK(error_of("species X bound 3\nreaction r: 0 -> X @ hill(1, 0, 2; X)").find("must be positive") !=
          std::string::npos);
    CHECK(error_of("species X bound 3\nparam k in [1,2]\nreaction r: 0 -> X @ hill(k, k, 2; X)")
              .find("only once") != std::string::npos);
    CHECK(error_of("species X bound 3\nreaction r: 0 -> X @ warp(1)").find("unknown kinetics") != std::string::npos);
    CHECK(error_of("bogus").find("expected 'species'") != std::string::npos);
    CHECK(error_of("species X bound 3 init 0\nconstraint X in [1, 2]").find("initial state") != std::string::npos);
}
