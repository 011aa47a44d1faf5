#include <algorithm>
#include <deque>
#include <limits>
#include <ostream>

#include "stochrob/state_space.hpp"

namespace stochrob {

std::uint64_t StateSpace::key(std::span<const int> s) const {
    std::uint64_t k = 0;
    for (int i = 0; i < width_; ++i) k = k * radix_[i] + static_cast<std::uint64_t>(s[i] - offset_[i]);
    return k;
}

std::optional<int> StateSpace::find(std::span<const int> s) const {
    for (int i = 0; i < width_; ++i)
        if (s[i] < offset_[i] || static_cast<std::uint64_t>(s[i] - offset_[i]) >= radix_[i]) return std::nullopt;
    auto it = index_.find(key(s));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Eigen::VectorXd StateSpace::population(int species) const {
    Eigen::VectorXd v(size());
    for (int i = 0; i < size(); ++i) v[i] = state(i)[species];
    return v;
}

StateSpace enumerate(const Network& net, std::span<const std::vector<int>> extra_initial,
                     std::size_t max_states) {
    StateSpace sp;
    sp.width_ = static_cast<int>(net.species.size());
    double capacity = 1.0;
    for (const auto& s : net.species) {
        sp.offset_.push_back(s.min);
        sp.radix_.push_back(static_cast<std::uint64_t>(s.max - s.min + 1));
        capacity *= s.max - s.min + 1;
    }
    if (capacity > 1.8e19) throw StateLimitExceeded("population bounds too large to index");

    std::deque<int> queue;
    auto add = [&](std::span<const int> s) -> int {
        auto [it, fresh] = sp.index_.emplace(sp.key(s), sp.size());
        if (fresh) {
            if (static_cast<std::size_t>(sp.size()) >= max_states)
                throw StateLimitExceeded("state space exceeds " + std::to_string(max_states) + " states");
            sp.data_.insert(sp.data_.end(), s.begin(), s.end());
            queue.push_back(it->second);
        }
        return it->second;
    };

    std::vector<std::vector<int>> starts{net.initial_state()};
    starts.insert(starts.end(), extra_initial.begin(), extra_initial.end());
    for (const auto& s : starts) {
        if (s.size() != net.species.size() || !net.admissible(s))
            throw std::invalid_argument("initial state outside the species bounds");
        int idx = add(s);
        if (std::find(sp.initial_.begin(), sp.initial_.end(), idx) == sp.initial_.end())
            sp.initial_.push_back(idx);
    }

    std::vector<int> next(sp.width_);
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        for (const auto& r : net.reactions) {
            if (!r.changes_state()) continue;
            auto s = sp.state(cur);
            if (propensity(r, s) == 0.0) continue;
            for (int i = 0; i < sp.width_; ++i) next[i] = s[i] + r.change[i];
            if (!net.admissible(next)) continue;
            add(next);
        }
    }
    return sp;
}

ParametricMatrix::ParametricMatrix(const Network& net, const StateSpace& space)
    : net_(&net), space_(&space) {
    const int n = space.size();
    std::vector<int> next(space.num_species());
    out_ptr_.assign(n + 1, 0);
    for (int s = 0; s < n; ++s) {
        out_ptr_[s] = static_cast<int>(entries_.size());
        std::size_t first = entries_.size();
        for (std::size_t ri = 0; ri < net.reactions.size(); ++ri) {
            const Reaction& r = net.reactions[ri];
            if (!r.changes_state()) continue;
            auto st = space.state(s);
            if (propensity(r, st) == 0.0) continue;
            for (int i = 0; i < space.num_species(); ++i) next[i] = st[i] + r.change[i];
            auto dst = space.find(next);
            if (!dst || !net.admissible(next)) continue;
            entries_.push_back({s, *dst, static_cast<int>(ri)});
        }
        std::sort(entries_.begin() + first, entries_.end(), [](const Transition& a, const Transition& b) {
            return a.dst != b.dst ? a.dst < b.dst : a.reaction < b.reaction;
        });
        for (std::size_t e = first; e < entries_.size(); ++e)
            if (e == first || entries_[e].dst != entries_[e - 1].dst) ++pairs_;
    }
    out_ptr_[n] = static_cast<int>(entries_.size());

    in_ptr_.assign(n + 1, 0);
    for (const auto& t : entries_) ++in_ptr_[t.dst + 1];
    for (int s = 0; s < n; ++s) in_ptr_[s + 1] += in_ptr_[s];
    in_idx_.resize(entries_.size());
    std::vector<int> fill(in_ptr_.begin(), in_ptr_.end() - 1);
    for (std::size_t e = 0; e < entries_.size(); ++e) in_idx_[fill[entries_[e].dst]++] = static_cast<int>(e);
}

double ParametricMatrix::rate(const Transition& t, const Point& p) const {
    return eval_rate(net_->reactions[t.reaction], p, space_->state(t.src));
}

Interval ParametricMatrix::rate_range(const Transition& t, const Box& box) const {
    return rate_bounds(net_->reactions[t.reaction], box, space_->state(t.src));
}

ConcreteMatrix instantiate(const ParametricMatrix& m, const Point& p) {
    const int n = m.size();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(m.entries().size());
    ConcreteMatrix c;
    c.exit = Eigen::VectorXd::Zero(n);
    for (const auto& t : m.entries()) {
        double r = m.rate(t, p);
        if (r == 0.0) continue;
        trip.emplace_back(t.src, t.dst, r);
        c.exit[t.src] += r;
    }
    c.rates.resize(n, n);
    c.rates.setFromTriplets(trip.begin(), trip.end());
    c.rates.makeCompressed();
    return c;
}

ConcreteMatrix make_absorbing(const ConcreteMatrix& m, const std::vector<char>& absorbing) {
    ConcreteMatrix c;
    c.rates = m.rates;
    c.exit = m.exit;
    for (int s = 0; s < c.rates.outerSize(); ++s) {
        if (!absorbing[s]) continue;
        for (SparseRates::InnerIterator it(c.rates, s); it; ++it) it.valueRef() = 0.0;
        c.exit[s] = 0.0;
    }
    c.rates.prune(0.0);
    return c;
}

double max_exit_rate(const ParametricMatrix& m, const Box& box) {
    double best = 0.0;
    const auto& e = m.entries();
    for (int s = 0; s < m.size(); ++s) {
        double sum = 0.0;
        for (int i = m.out_begin(s); i < m.out_begin(s + 1); ++i) sum += m.rate_range(e[i], box).hi;
        best = std::max(best, sum);
    }
    return best;
}

std::optional<double> uniformization_rate(const ParametricMatrix& m, const Box& box) {
    double sup = max_exit_rate(m, box);
    if (sup <= 0.0) return std::nullopt;
    return kUniformizationMargin * sup;
}

void dump_states(const Network& net, const StateSpace& space, std::ostream& os) {
    os << "#";
    for (const auto& s : net.species) os << ' ' << s.name;
    os << '\n';
    for (int i = 0; i < space.size(); ++i) {
        auto st = space.state(i);
        for (int j = 0; j < space.num_species(); ++j) os << (j ? " " : "") << st[j];
        os << '\n';
    }
}

Eigen::VectorXd transfer(const Network& from_net, const StateSpace& from, const Eigen::VectorXd& dist,
                         const Network& to_net, const StateSpace& to) {
    std::vector<int> source_of(to_net.species.size(), -1);
    for (std::size_t i = 0; i < to_net.species.size(); ++i)
        if (auto j = from_net.species_index(to_net.species[i].name)) source_of[i] = *j;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(to.size());
    std::vector<int> s(to_net.species.size());
    for (int i = 0; i < from.size(); ++i) {
        if (dist[i] == 0.0) continue;
        auto src = from.state(i);
        for (std::size_t k = 0; k < s.size(); ++k) s[k] = source_of[k] >= 0 ? src[source_of[k]] : to_net.species[k].init;
        auto idx = to.find(s);
        if (!idx) throw std::invalid_argument("distribution has mass outside the target state space");
        out[*idx] += dist[i];
    }
    return out;
}

}  // namespace stochrob
