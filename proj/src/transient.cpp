#include <cmath>
#include <deque>
#include <numbers>
#include <stdexcept>

#include "stochrob/transient.hpp"

namespace stochrob {

namespace {

// Error of Stirling's approximation to log(n!), after Loader (2000).
double stirlerr(double n) {
    constexpr double s0 = 1.0 / 12, s1 = 1.0 / 360, s2 = 1.0 / 1260, s3 = 1.0 / 1680, s4 = 1.0 / 1188;
    if (n <= 15.0)
        return std::lgamma(n + 1.0) - (n + 0.5) * std::log(n) + n - 0.5 * std::log(2 * std::numbers::pi);
    double nn = n * n;
    if (n > 500) return (s0 - s1 / nn) / n;
    if (n > 80) return (s0 - (s1 - s2 / nn) / nn) / n;
    if (n > 35) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n;
    return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
}

// x log(x/np) + np - x, without cancellation near x = np.
double bd0(double x, double np) {
    if (std::abs(x - np) < 0.1 * (x + np)) {
        double v = (x - np) / (x + np);
        double s = (x - np) * v;
        double ej = 2 * x * v;
        v *= v;
        for (int j = 1; j < 1000; ++j) {
            ej *= v;
            double s1 = s + ej / (2 * j + 1);
            if (s1 == s) return s1;
            s = s1;
        }
        return s;
    }
    return x * std::log(x / np) + np - x;
}

double poisson_pmf(int k, double lambda) {
    if (k == 0) return std::exp(-lambda);
    double x = k;
    return std::exp(-stirlerr(x) - bd0(x, lambda)) / std::sqrt(2 * std::numbers::pi * x);
}

}  // namespace

PoissonWindow fox_glynn(double lambda, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
    PoissonWindow w;
    w.lambda = lambda;
    if (lambda == 0.0) {
        w.weights = {1.0};
        return w;
    }
    const int mode = static_cast<int>(std::floor(lambda));
    const double half = 0.5 * eps;
    std::deque<double> pm{poisson_pmf(mode, lambda)};

    // Right: beyond i > lambda the ratio p(i+1)/p(i) <= lambda/(i+1), so the
    // tail past R is at most p(R+1) / (1 - lambda/(R+2)).
    int right = mode;
    double next = pm.back() * lambda / (right + 1);
    while (next / (1.0 - lambda / (right + 2)) > half) {
        pm.push_back(next);
        ++right;
        next = pm.back() * lambda / (right + 1);
    }
    // Left: below the mode p(i-1)/p(i) = i/lambda, so the tail before L is at
    // most p(L-1) / (1 - (L-1)/lambda).
    int left = mode;
    while (left > 0) {
        double prev = pm.front() * left / lambda;
        if (prev / (1.0 - (left - 1) / lambda) <= half) break;
        pm.push_front(prev);
        --left;
    }
    w.left = left;
    w.right = right;
    w.weights.assign(pm.begin(), pm.end());
    w.total = 0.0;
    for (double x : w.weights) w.total += x;
    return w;
}

std::vector<double> mixed_weights(const PoissonWindow& w, double q) {
    std::vector<double> out(w.right + 1);
    double cum = 0.0;
    for (int i = 0; i <= w.right; ++i) {
        cum += w.weight(i);
        out[i] = std::max(0.0, 1.0 - cum) / q;
    }
    return out;
}

StepWeights step_weights(double q, double t, double eps, Weighting kind) {
    PoissonWindow win = fox_glynn(q * t, eps);
    StepWeights sw;
    sw.poisson_total = win.total;
    if (kind == Weighting::Poisson) {
        sw.w.assign(win.right + 1, 0.0);
        for (int i = win.left; i <= win.right; ++i) sw.w[i] = win.weight(i);
        sw.first = win.left;
    } else {
        sw.w = mixed_weights(win, q);
        sw.first = 0;
    }
    return sw;
}

namespace {

Eigen::VectorXd stay_probability(const ConcreteMatrix& m, double q) {
    if (m.size() && m.max_exit() > q * (1 + 1e-12))
        throw std::invalid_argument("uniformization rate below the maximal exit rate");
    return (1.0 - m.exit.array() / q).max(0.0).matrix();
}

Eigen::VectorXd run_backward(const ConcreteMatrix& m, double q, const Eigen::VectorXd& seed,
                             const StepWeights& sw) {
    Eigen::VectorXd stay = stay_probability(m, q);
    Eigen::VectorXd tau = seed;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(seed.size());
    Eigen::VectorXd next(seed.size());
    const int last = static_cast<int>(sw.w.size()) - 1;
    for (int i = 0; i <= last; ++i) {
        if (i >= sw.first) acc += sw.w[i] * tau;
        if (i == last) break;
        next.noalias() = m.rates * tau;
        tau = stay.cwiseProduct(tau) + next / q;
    }
    return acc;
}

}  // namespace

Eigen::VectorXd forward(const ConcreteMatrix& m, double q, const Eigen::VectorXd& init, double t, double eps) {
    if (t == 0.0) return init;
    StepWeights sw = step_weights(q, t, eps, Weighting::Poisson);
    Eigen::VectorXd stay = stay_probability(m, q);
    Eigen::VectorXd pi = init;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(init.size());
    Eigen::VectorXd next(init.size());
    const int last = static_cast<int>(sw.w.size()) - 1;
    for (int i = 0; i <= last; ++i) {
        if (i >= sw.first) acc += sw.w[i] * pi;
        if (i == last) break;
        next.noalias() = m.rates.transpose() * pi;
        pi = stay.cwiseProduct(pi) + next / q;
    }
    return acc;
}

Eigen::VectorXd backward(const ConcreteMatrix& m, double q, const Eigen::VectorXd& target, double t, double eps) {
    if (t == 0.0) return target;
    return run_backward(m, q, target, step_weights(q, t, eps, Weighting::Poisson));
}

Eigen::VectorXd cumulative(const ConcreteMatrix& m, double q, const Eigen::VectorXd& rho, double t, double eps) {
    if (t == 0.0) return Eigen::VectorXd::Zero(rho.size());
    return run_backward(m, q, rho, step_weights(q, t, eps, Weighting::Mixed));
}

Eigen::VectorXd indicator(const std::vector<char>& set) {
    Eigen::VectorXd v(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) v[i] = set[i] ? 1.0 : 0.0;
    return v;
}

}  // namespace stochrob
