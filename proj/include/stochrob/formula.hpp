#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "stochrob/model.hpp"
#include "stochrob/state_space.hpp"

namespace stochrob {

enum class Cmp { Less, LessEq, Greater, GreaterEq, Equal, NotEqual };

bool compare(double lhs, Cmp op, double rhs);
std::string to_string(Cmp op);

// sum coeffs[i] * X_i + offset  op  0
struct Predicate {
    std::vector<double> coeffs;
    double offset = 0.0;
    Cmp op = Cmp::GreaterEq;

    bool holds(std::span<const int> state) const;
};

// Optional threshold on a quantitative operator; absent means `=?`.
struct Bound {
    Cmp op = Cmp::GreaterEq;
    double value = 0.0;
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    enum class Kind {
        True,
        Atom,
        Not,
        And,
        Or,
        Prob,        // P[path]
        RewardCum,   // R{name}[C<=t]
        RewardInst,  // R{name}[I=t]
        Expect,      // E{name}[I=t]
    };
    enum class Path { Next, Until, Globally };

    Kind kind = Kind::True;
    Predicate atom;
    FormulaPtr left;   // operand of Not/And/Or; first operand of Until
    FormulaPtr right;  // second operand of And/Or/Until; operand of Next/Globally

    // Quantitative operators.
    std::optional<Bound> bound;
    Path path = Path::Until;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::string name;  // reward structure or post-processing function

    std::string text;  // source form, for reports

    bool quantitative() const { return kind >= Kind::Prob; }
};

// Reward rate earned in states satisfying every predicate of `when`.
struct RewardItem {
    std::vector<Predicate> when;
    double value;

    bool applies(std::span<const int> state) const;
};

struct RewardStructure {
    std::string name;
    std::vector<RewardItem> items;

    Eigen::VectorXd rates(const StateSpace& space) const;
};

// Post-processing function on a distribution; only mqd is built in.
struct PostFunction {
    std::string name;
    std::string kind;  // "mqd"
    int species = -1;
};

struct PropertySet {
    std::vector<RewardStructure> rewards;
    std::vector<PostFunction> posts;
    std::vector<FormulaPtr> formulas;

    const RewardStructure* reward(std::string_view name) const;
    const PostFunction* post(std::string_view name) const;
};

// Parses one formula, resolving species names against the network.
FormulaPtr parse_formula(std::string_view text, const Network& net, const PropertySet* context = nullptr);
PropertySet parse_properties(std::string_view text, const Network& net);
PropertySet load_properties(const std::string& path, const Network& net);

// States satisfying an atomic predicate.
std::vector<char> label(const StateSpace& space, const Predicate& p);

}  // namespace stochrob
