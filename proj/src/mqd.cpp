#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "stochrob/mqd.hpp"

namespace stochrob {

double mqd(const Eigen::VectorXd& dist, const Eigen::VectorXd& population) {
    double mass = dist.sum();
    if (mass <= 0.0) return 0.0;
    double mean = dist.dot(population) / mass;
    return dist.dot((population.array() - mean).square().matrix()) / mass;
}

double mqd(const Eigen::VectorXd& dist, const StateSpace& space, int species) {
    return mqd(dist, space.population(species));
}

namespace {

struct Marginal {
    std::vector<double> value;
    std::vector<double> lo;
    std::vector<double> cap;  // hi - lo
};

double variance(const std::vector<double>& v, const std::vector<double>& mu) {
    double m0 = 0, m1 = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
        m0 += mu[j];
        m1 += mu[j] * v[j];
    }
    if (m0 <= 0) return 0.0;
    double mean = m1 / m0;
    double s = 0;
    for (std::size_t j = 0; j < v.size(); ++j) s += mu[j] * (v[j] - mean) * (v[j] - mean);
    return s / m0;
}

// Lower bounds plus `budget` extra mass poured into values in `order`.
void fill(const Marginal& mg, const std::vector<int>& order, double budget, std::vector<double>& mu) {
    mu = mg.lo;
    for (int j : order) {
        if (budget <= 0) break;
        double take = std::min(budget, mg.cap[j]);
        mu[j] += take;
        budget -= take;
    }
}

}  // namespace

Interval mqd_bounds(const BoundedVector& bd, const Eigen::VectorXd& population, double mass) {
    if (!(mass > 0)) throw std::domain_error("mass must be positive");
    std::map<double, std::pair<double, double>> agg;
    for (int s = 0; s < bd.size(); ++s) {
        auto& e = agg[population[s]];
        e.first += bd.lo[s] / mass;
        e.second += bd.hi[s] / mass;
    }
    Marginal mg;
    double sum_lo = 0, sum_hi = 0;
    for (auto& [v, b] : agg) {
        mg.value.push_back(v);
        mg.lo.push_back(b.first);
        mg.cap.push_back(std::max(0.0, b.second - b.first));
        sum_lo += b.first;
        sum_hi += b.second;
    }
    constexpr double tol = 1e-9;
    if (sum_lo > 1 + tol || sum_hi < 1 - tol) throw std::domain_error("bounds admit no distribution of the given mass");
    const double budget = std::max(0.0, 1.0 - sum_lo);
    const int m = static_cast<int>(mg.value.size());
    if (m == 0) return {0.0, 0.0};

    // Var(mu) = min_c sum mu (v - c)^2.  For a fixed centre c both extremes
    // over mu are greedy fills by distance from c, and the fill only changes
    // where c crosses a midpoint of two values.
    std::vector<double> cuts;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) cuts.push_back(0.5 * (mg.value[i] + mg.value[j]));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const double span = mg.value.back() - mg.value.front() + 1.0;
    std::vector<double> edges;
    edges.push_back(mg.value.front() - span);
    edges.insert(edges.end(), cuts.begin(), cuts.end());
    edges.push_back(mg.value.back() + span);

    double best_max = std::numeric_limits<double>::infinity();
    double best_min = std::numeric_limits<double>::infinity();
    std::vector<int> order(m);
    std::vector<double> mu;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        double a = edges[k], b = edges[k + 1];
        double c = 0.5 * (a + b);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int x, int y) {
            return std::abs(mg.value[x] - c) > std::abs(mg.value[y] - c);
        });
        // Farthest first: the worst case for a fixed centre.
        fill(mg, order, budget, mu);
        double m0 = 0, m1 = 0, m2 = 0;
        for (int j = 0; j < m; ++j) {
            m0 += mu[j];
            m1 += mu[j] * mg.value[j];
            m2 += mu[j] * mg.value[j] * mg.value[j];
        }
        double cc = std::clamp(m1 / m0, a, b);
        double g = m2 - 2 * cc * m1 + cc * cc * m0;
        // At the unclipped centre this equals the variance of mu; use the
        // two-pass form there for accuracy.
        if (cc == m1 / m0) g = variance(mg.value, mu) * m0;
        best_max = std::min(best_max, g / m0);
        // Closest first.
        std::reverse(order.begin(), order.end());
        fill(mg, order, budget, mu);
        best_min = std::min(best_min, variance(mg.value, mu));
    }
    return {best_min, best_max};
}

Interval mqd_bounds(const BoundedVector& bd, const StateSpace& space, int species, double mass) {
    return mqd_bounds(bd, space.population(species), mass);
}

}  // namespace stochrob
