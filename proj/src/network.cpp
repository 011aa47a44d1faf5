#include "stochrob/model.hpp"

namespace stochrob {

std::optional<int> Network::species_index(std::string_view name) const {
    for (std::size_t i = 0; i < species.size(); ++i)
        if (species[i].name == name) return static_cast<int>(i);
    return std::nullopt;
}

std::optional<int> Network::dim_index(std::string_view name) const {
    for (std::size_t i = 0; i < dims.size(); ++i)
        if (dims[i].name == name) return static_cast<int>(i);
    return std::nullopt;
}

std::optional<double> Network::constant(std::string_view name) const {
    for (const auto& c : constants)
        if (c.name == name) return c.value;
    return std::nullopt;
}

std::vector<int> Network::initial_state() const {
    std::vector<int> s;
    s.reserve(species.size());
    for (const auto& sp : species) s.push_back(sp.init);
    return s;
}

bool Network::admissible(std::span<const int> state) const {
    for (std::size_t i = 0; i < species.size(); ++i)
        if (state[i] < species[i].min || state[i] > species[i].max) return false;
    for (const auto& c : constraints) {
        long v = 0;
        for (std::size_t i = 0; i < c.coeffs.size(); ++i) v += static_cast<long>(c.coeffs[i]) * state[i];
        if (v < c.lo || v > c.hi) return false;
    }
    return true;
}

Box Network::space() const {
    Box b;
    b.reserve(dims.size());
    for (const auto& d : dims) b.push_back(d.range);
    return b;
}

Point Network::midpoint() const {
    Point p(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i) p[i] = dims[i].range.mid();
    return p;
}

bool Network::contains(const Point& p) const {
    if (static_cast<std::size_t>(p.size()) != dims.size()) return false;
    for (std::size_t i = 0; i < dims.size(); ++i)
        if (!dims[i].range.contains(p[i])) return false;
    return true;
}

void Network::fix(std::string_view name, double value) {
    if (!(value >= 0)) throw std::invalid_argument("value for '" + std::string(name) + "' must be non-negative");
    if (auto d = dim_index(name)) {
        if (!dims[*d].range.contains(value))
            throw std::invalid_argument("value for '" + std::string(name) + "' lies outside its interval");
        dims[*d].range = {value, value};
        return;
    }
    for (auto& c : constants) {
        if (c.name != name) continue;
        // Constants are folded into rates at parse time; rewrite the uses.
        for (auto& r : reactions)
            for (ParamRef* p : {&r.kinetics.rate, &r.kinetics.half, &r.kinetics.coeff})
                if (!p->perturbed() && p->name == c.name) p->value = p->scale * value;
        c.value = value;
        return;
    }
    throw std::invalid_argument("unknown constant or parameter '" + std::string(name) + "'");
}

}  // namespace stochrob
