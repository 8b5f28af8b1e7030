#pragma once

#include "dataset.hpp"
#include "model.hpp"

#include <cstdint>
#include <map>
#include <random>

namespace hsbl {

template <class T> struct ShearBuildingSpec {
    Index stories = 10;
    std::vector<T> floor_mass{100e3};         // one value or one per floor (kg)
    std::vector<T> story_stiffness{176.729e6}; // one value or one per story (N/m)

    T mass(Index k) const { return floor_mass.size() == 1 ? floor_mass[0] : floor_mass.at(k); }
    T stiffness(Index k) const { return story_stiffness.size() == 1 ? story_stiffness[0] : story_stiffness.at(k); }

    void validate() const {
        if (stories < 1) throw ConfigError("shear building: need at least one story");
        auto check = [&](const std::vector<T>& v, const char* what) {
            if (v.size() != 1 && static_cast<Index>(v.size()) != stories)
                throw ConfigError(std::string("shear building: ") + what + " needs 1 or `stories` values");
            for (T x : v)
                if (!(x > 0)) throw ConfigError(std::string("shear building: ") + what + " must be positive");
        };
        check(floor_mass, "floor_mass");
        check(story_stiffness, "story_stiffness");
    }
};

// One substructure per story; story 1 ties floor 1 to the ground. K0 = 0.
template <class T> StructuralModel<T> shear_building_model(const ShearBuildingSpec<T>& spec) {
    spec.validate();
    const Index N = spec.stories;
    StructuralModel<T> mdl;
    mdl.d = N;
    mdl.n = N;
    mdl.M = Mat<T>::Zero(N, N);
    for (Index k = 0; k < N; ++k) mdl.M(k, k) = spec.mass(k);
    mdl.K0 = Mat<T>::Zero(N, N);
    for (Index j = 0; j < N; ++j) {
        Mat<T> K = Mat<T>::Zero(N, N);
        const T k = spec.stiffness(j);
        K(j, j) += k;
        if (j > 0) {
            K(j - 1, j - 1) += k;
            K(j - 1, j) -= k;
            K(j, j - 1) -= k;
        }
        mdl.Ksub.push_back(K);
    }
    return mdl;
}

// theta_j <- theta_j (1 - loss_j)
template <class T> Vec<T> apply_damage(const NoDeduce<Vec<T>>& theta, const std::map<Index, T>& pattern) {
    Vec<T> out = theta;
    for (const auto& [j, loss] : pattern) {
        if (j < 0 || j >= theta.size()) throw ConfigError("apply_damage: substructure index out of range");
        if (!(loss >= 0 && loss < 1)) throw ConfigError("apply_damage: loss must lie in [0, 1)");
        out(j) *= T(1) - loss;
    }
    return out;
}

enum class NoiseOn { Omega, Omega2 };
enum class ShapeNoiseScale { Rms, PerComponent };

template <class T> struct NoiseSpec {
    T freq_cov = 0.01;
    T shape_cov = 0.01;
    std::uint64_t seed = 0;
    NoiseOn noise_on = NoiseOn::Omega;
    ShapeNoiseScale shape_scale = ShapeNoiseScale::Rms;
};

// Portable normal stream: mt19937_64 seeded through seed_seq from (seed, tag, a, b),
// 53-bit uniforms and the Box-Muller transform (both outputs used).
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint32_t tag, std::uint32_t a, std::uint32_t b) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                          tag, a, b};
        gen_.seed(seq);
    }
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0;
    bool has_spare_ = false;
};

enum StreamTag : std::uint32_t { kNoiseStream = 1, kThetaInitStream = 2 };

// theta_init ~ U[lo, hi] per component, reproducible from seed
template <class T> Vec<T> random_theta_init(Index n, std::uint64_t seed, T lo = 2, T hi = 3) {
    NormalStream rs(seed, kThetaInitStream, 0, 0);
    Vec<T> th(n);
    for (Index j = 0; j < n; ++j) th(j) = lo + (hi - lo) * T(rs.uniform());
    return th;
}

// partial layout: floors 1, 4, 5, 7, 10 (0-based DOFs)
inline std::vector<Index> partial_sensors_10() { return {0, 3, 4, 6, 9}; }

template <class T> std::vector<Index> all_dofs(Index d) {
    std::vector<Index> v(d);
    for (Index k = 0; k < d; ++k) v[k] = k;
    return v;
}

// Noisy q-segment dataset from the exact lowest m eigenpairs.
// Each (segment, mode) pair owns one stream: one frequency draw, then d shape draws.
template <class T>
ModalDataset<T> simulate_modal_data(const StructuralModel<T>& model, const NoDeduce<Vec<T>>& theta, Index m, Index q,
                                    const std::vector<Index>& observed_dofs, const NoiseSpec<T>& noise) {
    if (q < 3) throw ConfigError("simulate: q >= 3 segments are required");
    if (m < 1 || m > model.d) throw ConfigError("simulate: mode count must be in [1, d]");
    if (noise.freq_cov < 0 || noise.shape_cov < 0) throw ConfigError("simulate: noise levels must be nonnegative");
    const Index d = model.d, s = static_cast<Index>(observed_dofs.size());
    const SystemModalState<T> ex = eigen_solve(model, theta, m);

    ModalDataset<T> ds;
    ds.q = q;
    ds.m = m;
    ds.s = s;
    ds.observed_dofs = observed_dofs;
    ds.omega_hat2.resize(q * m);
    ds.Psi_hat.resize(q * m * s);

    for (Index r = 0; r < q; ++r) {
        for (Index i = 0; i < m; ++i) {
            NormalStream rs(noise.seed, kNoiseStream, static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(i));
            const T e = T(rs.normal());
            const T w2 = ex.omega2(i);
            ds.omega_hat2(r * m + i) = noise.noise_on == NoiseOn::Omega ? sqr(std::sqrt(w2) * (T(1) + noise.freq_cov * e))
                                                                        : w2 * (T(1) + noise.freq_cov * e);
            const Vec<T> v = ex.Phi.segment(i * d, d);
            const T rms = std::sqrt(v.squaredNorm() / T(d));
            Vec<T> p = v;
            for (Index a = 0; a < d; ++a) {
                const T scale = noise.shape_scale == ShapeNoiseScale::Rms ? rms : std::abs(v(a));
                p(a) += noise.shape_cov * scale * T(rs.normal());
            }
            Vec<T> obs(s), ref(s);
            for (Index k = 0; k < s; ++k) {
                obs(k) = p(observed_dofs[k]);
                ref(k) = v(observed_dofs[k]);
            }
            const T nrm = obs.norm();
            if (nrm == T(0)) throw NumericalError("simulate: zero observed mode shape");
            obs /= nrm;
            if (obs.dot(ref) < T(0)) obs = -obs;
            ds.psi(r, i) = obs;
        }
    }
    normalize_mode_shapes(ds);
    ds.validate(d);
    return ds;
}

} // namespace hsbl
