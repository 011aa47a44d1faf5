#pragma once

#include <Eigen/Core>

#include "stochrob/interval.hpp"
#include "stochrob/param_transient.hpp"
#include "stochrob/state_space.hpp"

namespace stochrob {

// Variance of the population under `dist`, normalised by the total mass so
// that truncated distributions are measured on their own support.
double mqd(const Eigen::VectorXd& dist, const Eigen::VectorXd& population);
double mqd(const Eigen::VectorXd& dist, const StateSpace& space, int species);

// Bounds on mqd(pi) over all pi with bd.lo <= pi <= bd.hi and sum(pi) = mass.
// Throws std::domain_error when no such pi exists.
Interval mqd_bounds(const BoundedVector& bd, const Eigen::VectorXd& population, double mass = 1.0);
Interval mqd_bounds(const BoundedVector& bd, const StateSpace& space, int species, double mass = 1.0);

}  // namespace stochrob
