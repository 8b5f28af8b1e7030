#pragma once

#include <hsbl/hsbl.hpp>

#include <functional>
#include <numbers>
#include <random>

namespace fx {

using hsbl::Index;
using MatD = hsbl::Mat<double>;
using VecD = hsbl::Vec<double>;

inline MatD random_sym(Index d, std::mt19937& g) {
    std::uniform_real_distribution<double> u(-1, 1);
    MatD A(d, d);
    for (Index r = 0; r < d; ++r)
        for (Index c = 0; c < d; ++c) A(r, c) = u(g);
    return (A + A.transpose()) / 2;
}

inline MatD random_spd(Index d, std::mt19937& g) {
    MatD A = random_sym(d, g);
    return A * A.transpose() + MatD::Identity(d, d) * double(d);
}

inline VecD random_vec(Index n, std::mt19937& g, double lo = -1, double hi = 1) {
    std::uniform_real_distribution<double> u(lo, hi);
    VecD v(n);
    for (Index k = 0; k < n; ++k) v(k) = u(g);
    return v;
}

// d-DOF model with SPD M, random symmetric K0 and n random PSD substructures
inline hsbl::StructuralModel<double> random_model(Index d, Index n, std::mt19937& g) {
    hsbl::StructuralModel<double> m;
    m.d = d;
    m.n = n;
    m.M = random_spd(d, g);
    m.K0 = random_sym(d, g);
    for (Index j = 0; j < n; ++j) {
        MatD A = random_sym(d, g);
        m.Ksub.push_back(A * A.transpose());
    }
    return m;
}

// small shear building in O(1) units
inline hsbl::StructuralModel<double> small_shear(Index stories) {
    hsbl::ShearBuildingSpec<double> spec;
    spec.stories = stories;
    spec.floor_mass = {1.0};
    spec.story_stiffness = {1000.0};
    return hsbl::shear_building_model(spec);
}

inline hsbl::NoiseSpec<double> noise(double cov, std::uint64_t seed) {
    hsbl::NoiseSpec<double> ns;
    ns.freq_cov = cov;
    ns.shape_cov = cov;
    ns.seed = seed;
    return ns;
}

// central-difference gradient of f at x
inline VecD fd_grad(const std::function<double(const VecD&)>& f, const VecD& x, double rel = 1e-6) {
    VecD g(x.size());
    for (Index k = 0; k < x.size(); ++k) {
        const double h = rel * (x(k) != 0 ? std::abs(x(k)) : 1.0);
        VecD a = x, b = x;
        a(k) += h;
        b(k) -= h;
        g(k) = (f(a) - f(b)) / (2 * h);
    }
    return g;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace fx
