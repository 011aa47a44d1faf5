#pragma once

#include <vector>

#include <Eigen/Core>

#include "stochrob/state_space.hpp"

namespace stochrob {

// Poisson(lambda) probabilities on [left, right], covering at least 1 - eps
// of the mass.
struct PoissonWindow {
    int left = 0;
    int right = 0;
    std::vector<double> weights;
    double total = 1.0;
    double lambda = 0.0;

    double weight(int i) const { return i < left || i > right ? 0.0 : weights[i - left]; }
};

PoissonWindow fox_glynn(double lambda, double eps);

// (1/q) * (1 - sum_{j<=i} gamma_j) for i in [0, right].  Summing the step
// vectors with these weights gives expected accumulated reward.
std::vector<double> mixed_weights(const PoissonWindow& w, double q);

enum class Weighting { Poisson, Mixed };

// Step weights for horizon t at rate q, indexed from 0.  The first index that
// contributes is `first`.
struct StepWeights {
    std::vector<double> w;
    int first = 0;
    double poisson_total = 1.0;
};
StepWeights step_weights(double q, double t, double eps, Weighting kind);

Eigen::VectorXd forward(const ConcreteMatrix& m, double q, const Eigen::VectorXd& init, double t, double eps);

// Expected value of `target` at time t from every state.
Eigen::VectorXd backward(const ConcreteMatrix& m, double q, const Eigen::VectorXd& target, double t, double eps);

// Expected reward accumulated over [0, t] from every state, reward rate rho.
Eigen::VectorXd cumulative(const ConcreteMatrix& m, double q, const Eigen::VectorXd& rho, double t, double eps);

// Indicator vector of a state set.
Eigen::VectorXd indicator(const std::vector<char>& set);

}  // namespace stochrob
