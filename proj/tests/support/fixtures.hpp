#pragma once

#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "stochrob/state_space.hpp"

namespace fixtures {

inline std::string model_path(const std::string& name) { return std::string(STOCHROB_MODELS) + "/" + name; }

// Random 3-species network over two parameters.  Every kinetic law shows up:
// affine, scaled affine, Hill and sigmoid rates.
inline std::string random_network(unsigned seed) {
    std::mt19937 rng(seed);
    auto coin = [&](int n) { return std::uniform_int_distribution<>(0, n - 1)(rng); };
    auto real = [&](double a, double b) { return std::uniform_real_distribution<>(a, b)(rng); };
    const char* names[] = {"A", "B", "C"};
    std::ostringstream os;
    for (int i = 0; i < 3; ++i) os << "species " << names[i] << " bound 4 init " << 1 + coin(2) << "\n";
    os << "param k in [0.2, 1.2]\nparam n in [0.5, 3]\n";
    int id = 0;
    for (int i = 0; i < 3; ++i) {
        int j = (i + 1 + coin(2)) % 3;
        os << "reaction r" << id++ << ": " << names[i] << " -> " << names[j] << " @ mass_action(" << real(0.1, 0.6)
           << ")\n";
        os << "reaction r" << id++ << ": " << names[i] << " -> 0 @ mass_action(" << real(0.05, 0.3) << "*k)\n";
    }
    os << "reaction r" << id++ << ": A + B -> C @ mass_action(k)\n";
    os << "reaction r" << id++ << ": 0 -> A @ hill(" << real(0.5, 1.5) << ", 2, n; C)\n";
    os << "reaction r" << id++ << ": 0 -> B @ sigmoid(" << real(0.2, 0.8) << ", n, 2)\n";
    os << "reaction r" << id++ << ": 0 -> C @ mass_action(0.3)\n";
    return os.str();
}

struct Chain {
    stochrob::Network net;
    stochrob::StateSpace space;
    std::unique_ptr<stochrob::ParametricMatrix> m;

    explicit Chain(stochrob::Network n) : net(std::move(n)) {
        space = stochrob::enumerate(net);
        m = std::make_unique<stochrob::ParametricMatrix>(net, space);
    }
    // The matrix points into net and space.
    Chain(Chain&&) = delete;
    static Chain file(const std::string& name) { return Chain(stochrob::load_model(model_path(name))); }
    static Chain text(const std::string& src) { return Chain(stochrob::parse_model(src)); }
};

inline stochrob::Point sample(const stochrob::Box& box, std::mt19937_64& rng) {
    stochrob::Point p(static_cast<Eigen::Index>(box.size()));
    for (std::size_t d = 0; d < box.size(); ++d)
        p[d] = box[d].degenerate() ? box[d].lo : std::uniform_real_distribution<>(box[d].lo, box[d].hi)(rng);
    return p;
}

inline stochrob::Box point_box(const stochrob::Point& p) {
    stochrob::Box b;
    for (Eigen::Index d = 0; d < p.size(); ++d) b.push_back({p[d], p[d]});
    return b;
}

}  // namespace fixtures
