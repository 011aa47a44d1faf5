#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "stochrob/model.hpp"

namespace stochrob {

class StateLimitExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Reachable population vectors in breadth-first discovery order.
class StateSpace {
public:
    int num_species() const { return width_; }
    int size() const { return static_cast<int>(data_.size() / std::max(width_, 1)); }
    std::span<const int> state(int i) const {
        return {data_.data() + static_cast<std::size_t>(i) * width_, static_cast<std::size_t>(width_)};
    }
    std::optional<int> find(std::span<const int> s) const;
    // Indices of the states enumeration started from; the network's initial
    // state comes first.
    const std::vector<int>& initial() const { return initial_; }

    // Population of one species in every state.
    Eigen::VectorXd population(int species) const;

private:
    friend StateSpace enumerate(const Network&, std::span<const std::vector<int>>, std::size_t);
    std::uint64_t key(std::span<const int> s) const;

    int width_ = 0;
    std::vector<int> data_;
    std::vector<int> offset_;
    std::vector<std::uint64_t> radix_;
    std::unordered_map<std::uint64_t, int> index_;
    std::vector<int> initial_;
};

// Closure of the initial state(s) under reactions whose firing stays within
// the species bounds and constraints.
StateSpace enumerate(const Network& net, std::span<const std::vector<int>> extra_initial = {},
                     std::size_t max_states = 10'000'000);

// One entry per (state, reaction) firing that moves to another state.
struct Transition {
    int src = 0;
    int dst = 0;
    int reaction = 0;
};

class ParametricMatrix {
public:
    ParametricMatrix(const Network& net, const StateSpace& space);

    const Network& network() const { return *net_; }
    const StateSpace& space() const { return *space_; }
    int size() const { return space_->size(); }

    // Sorted by source, then target, then reaction.
    const std::vector<Transition>& entries() const { return entries_; }
    // Entries leaving state s: entries()[out_begin(s) .. out_begin(s+1)).
    int out_begin(int s) const { return out_ptr_[s]; }
    // Entries entering state s, as indices into entries().
    std::span<const int> incoming(int s) const {
        return {in_idx_.data() + in_ptr_[s], static_cast<std::size_t>(in_ptr_[s + 1] - in_ptr_[s])};
    }

    double rate(const Transition& t, const Point& p) const;
    Interval rate_range(const Transition& t, const Box& box) const;

    // Distinct (source, target) pairs, i.e. entries after summing parallel
    // reactions.
    std::size_t num_transitions() const { return pairs_; }

private:
    const Network* net_;
    const StateSpace* space_;
    std::vector<Transition> entries_;
    std::vector<int> out_ptr_;
    std::vector<int> in_ptr_;
    std::vector<int> in_idx_;
    std::size_t pairs_ = 0;
};

using SparseRates = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Off-diagonal rate matrix of one chain plus its exit rates.
struct ConcreteMatrix {
    SparseRates rates;
    Eigen::VectorXd exit;

    int size() const { return static_cast<int>(exit.size()); }
    double max_exit() const { return exit.size() ? exit.maxCoeff() : 0.0; }
};

ConcreteMatrix instantiate(const ParametricMatrix& m, const Point& p);

// Chain with the outgoing transitions of every flagged state removed.
ConcreteMatrix make_absorbing(const ConcreteMatrix& m, const std::vector<char>& absorbing);

// Sup of the exit rate over all states and all points of the box.
double max_exit_rate(const ParametricMatrix& m, const Box& box);

// Margin applied to the sup exit rate so the uniformized chain keeps a
// positive self-loop probability everywhere.
inline constexpr double kUniformizationMargin = 1.02;

// kUniformizationMargin times max_exit_rate; nullopt for a chain without
// transitions, where no rate is defined.
std::optional<double> uniformization_rate(const ParametricMatrix& m, const Box& box);

// One state per line, in index order.
void dump_states(const Network& net, const StateSpace& space, std::ostream& os);

// Maps a distribution onto another network's state space, matching species
// by name.  Throws if probability mass would land outside the target space.
Eigen::VectorXd transfer(const Network& from_net, const StateSpace& from, const Eigen::VectorXd& dist,
                         const Network& to_net, const StateSpace& to);

}  // namespace stochrob
