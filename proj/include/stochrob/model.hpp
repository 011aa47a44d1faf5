#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "stochrob/interval.hpp"

namespace stochrob {

// One value per perturbation dimension.
using Point = Eigen::VectorXd;
// One closed interval per perturbation dimension.
using Box = std::vector<Interval>;

class ParseError : public std::runtime_error {
public:
    ParseError(int line, int column, const std::string& msg);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

struct Species {
    std::string name;
    int min = 0;
    int max = 0;
    int init = 0;
};

// A kinetic parameter is either a fixed number or a perturbation dimension.
// A perturbed parameter may carry a positive constant factor (`0.5*S`).
struct ParamRef {
    double value = 0.0;
    int dim = -1;
    double scale = 1.0;
    std::string name;  // source identifier, empty for literals

    bool perturbed() const { return dim >= 0; }
    double at(const Point& p) const { return perturbed() ? scale * p[dim] : value; }
    Interval over(const Box& b) const {
        return perturbed() ? Interval{scale * b[dim].lo, scale * b[dim].hi} : Interval{value, value};
    }
};

enum class KineticsKind { MassAction, Hill, Sigmoid };

struct Kinetics {
    KineticsKind kind = KineticsKind::MassAction;
    ParamRef rate;   // k for mass action and Hill, k_p for sigmoid
    ParamRef half;   // K for Hill, x_half for sigmoid
    ParamRef coeff;  // n for Hill and sigmoid
    // Species summed to form the regulating population X.
    std::vector<int> regulator;
};

struct Reaction {
    std::string name;
    std::vector<int> reactants;  // stoichiometry per species
    std::vector<int> products;
    std::vector<int> change;     // products - reactants
    Kinetics kinetics;

    bool changes_state() const;
};

// lo <= sum coeffs[i] * X_i <= hi
struct Constraint {
    std::vector<int> coeffs;
    int lo = 0;
    int hi = 0;
};

struct Dimension {
    std::string name;
    Interval range;
};

struct Constant {
    std::string name;
    double value = 0.0;
};

class Network {
public:
    std::vector<Species> species;
    std::vector<Reaction> reactions;
    std::vector<Constraint> constraints;
    std::vector<Dimension> dims;
    std::vector<Constant> constants;

    std::optional<int> species_index(std::string_view name) const;
    std::optional<int> dim_index(std::string_view name) const;
    std::optional<double> constant(std::string_view name) const;

    std::vector<int> initial_state() const;
    // Species bounds and linear constraints.
    bool admissible(std::span<const int> state) const;

    Box space() const;
    Point midpoint() const;
    bool contains(const Point& p) const;

    // Bind a constant or parameter by name to a fixed value.  Used to
    // collapse a dimension or override a constant from the command line.
    void fix(std::string_view name, double value);
};

Network parse_model(std::string_view text);
Network load_model(const std::string& path);
std::string to_source(const Network& net);

// Regulating population for Hill and sigmoid kinetics.
int regulator_level(const Kinetics& k, std::span<const int> state);

double eval_rate(const Reaction& r, const Point& p, std::span<const int> state);
Interval rate_bounds(const Reaction& r, const Box& box, std::span<const int> state);

// Sign of the partial derivative of a rate in one dimension over a box.
enum class Trend : std::int8_t { Flat = 0, Up = 1, Down = -1, Mixed = 2 };
Trend rate_trend(const Reaction& r, const Box& box, std::span<const int> state, int dim);

// True when the rate is c * theta_dim for a state-dependent c >= 0.
bool linear_in(const Reaction& r, int dim);
// Dimensions the rate of r depends on.
std::vector<int> rate_dims(const Reaction& r);

// Product of binomials C(state_i, reactants_i); zero if a reactant is short.
double propensity(const Reaction& r, std::span<const int> state);

}  // namespace stochrob
