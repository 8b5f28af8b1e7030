#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace hsbl {

using Index = Eigen::Index;

template <class T> using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T> using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
// keeps T deduced from the model argument only
template <class X> using NoDeduce = std::type_identity_t<X>;

// Bad input, bad configuration, malformed model (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Singular system, failed factorization, eigensolver failure (CLI exit code 4).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class T> inline T sqr(T x) { return x * x; }

// relative asymmetry ||A - A^T|| / ||A||, 0 for the zero matrix
template <class T> T asymmetry(const Mat<T>& A) {
    T nrm = A.norm();
    if (nrm == T(0)) return T(0);
    return (A - A.transpose()).norm() / nrm;
}

template <class T> Mat<T> symmetrize(const Mat<T>& A) {
    return T(0.5) * (A + A.transpose());
}

} // namespace hsbl
