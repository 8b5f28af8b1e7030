#pragma once

#include "common.hpp"

namespace hsbl {

enum class VariancePairing { AsPrinted, Conventional };

template <class T> struct DamageCurve {
    std::vector<T> f;
    std::vector<T> prob;
};

template <class T> struct DamageReport {
    Vec<T> map_ratio;
    Vec<T> cov_percent;   // monitoring c.o.v. of theta, percent
    std::vector<DamageCurve<T>> curves;
    std::vector<bool> alarm;

    std::vector<Index> alarms() const {
        std::vector<Index> out;
        for (Index j = 0; j < static_cast<Index>(alarm.size()); ++j)
            if (alarm[j]) out.push_back(j);
        return out;
    }
};

template <class T> Vec<T> stiffness_ratios(const Vec<T>& theta_u, const Vec<T>& theta_d) {
    if (theta_u.size() != theta_d.size()) throw ConfigError("stiffness_ratios: substructure counts differ");
    Vec<T> r(theta_u.size());
    for (Index j = 0; j < r.size(); ++j) {
        if (theta_u(j) == T(0)) throw ConfigError("stiffness_ratios: zero calibration value");
        r(j) = theta_d(j) / theta_u(j);
    }
    return r;
}

template <class T> T normal_cdf(T x) { return T(0.5) * std::erfc(-x / std::sqrt(T(2))); }

// P(theta_d < (1 - f) theta_u) under the Gaussian approximation
template <class T>
T damage_probability(T theta_u, T sigma_u, T theta_d, T sigma_d, T f,
                     VariancePairing pairing = VariancePairing::AsPrinted) {
    const T g = T(1) - f;
    const T num = g * theta_u - theta_d;
    const T var = pairing == VariancePairing::AsPrinted ? g * g * sigma_d * sigma_d + sigma_u * sigma_u
                                                        : g * g * sigma_u * sigma_u + sigma_d * sigma_d;
    if (var == T(0)) {
        if (num == T(0)) return T(0.5);
        return num > T(0) ? T(1) : T(0);
    }
    return normal_cdf(num / std::sqrt(var));
}

template <class T> std::vector<T> default_f_grid(T fmax = T(0.25), T fstep = T(0.0025)) {
    if (!(fstep > 0) || fmax < 0 || fmax > 1) throw ConfigError("f grid: need 0 <= fmax <= 1 and fstep > 0");
    std::vector<T> f;
    const long n = std::lround(fmax / fstep);
    for (long k = 0; k <= n; ++k) f.push_back(std::min(T(k) * fstep, fmax));
    return f;
}

template <class T>
DamageCurve<T> damage_curve(T theta_u, T sigma_u, T theta_d, T sigma_d, const std::vector<T>& f_grid,
                            VariancePairing pairing = VariancePairing::AsPrinted) {
    DamageCurve<T> c;
    c.f = f_grid;
    for (T f : f_grid) {
        if (f < 0 || f > 1) throw ConfigError("damage_curve: f outside [0, 1]");
        c.prob.push_back(damage_probability(theta_u, sigma_u, theta_d, sigma_d, f, pairing));
    }
    return c;
}

// theta and Sigma_theta of the calibration (u) and monitoring (d) runs
template <class T>
DamageReport<T> build_report(const Vec<T>& theta_u, const Mat<T>& cov_u, const Vec<T>& theta_d, const Mat<T>& cov_d,
                             const std::vector<T>& f_grid, VariancePairing pairing = VariancePairing::AsPrinted) {
    const Index n = theta_u.size();
    if (theta_d.size() != n || cov_u.rows() != n || cov_d.rows() != n)
        throw ConfigError("build_report: mismatched substructure counts");
    DamageReport<T> rep;
    rep.map_ratio = stiffness_ratios(theta_u, theta_d);
    rep.cov_percent.resize(n);
    for (Index j = 0; j < n; ++j) {
        const T su = std::sqrt(std::max(cov_u(j, j), T(0)));
        const T sd = std::sqrt(std::max(cov_d(j, j), T(0)));
        rep.cov_percent(j) = T(100) * sd / std::abs(theta_d(j));
        rep.curves.push_back(damage_curve(theta_u(j), su, theta_d(j), sd, f_grid, pairing));
        rep.alarm.push_back(rep.map_ratio(j) < T(1));
    }
    return rep;
}

} // namespace hsbl
