#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <string>

namespace epibif {

using EigenTriple = std::array<std::complex<double>, 3>;

enum class StabilityClass {
    StableNode,
    StableFocus,
    Saddle,
    UnstableNode,
    UnstableFocus,
    Nonhyperbolic,
};

std::string to_string(StabilityClass c);

/// Roots of the characteristic polynomial of a real 3x3 matrix, by the
/// trigonometric/Cardano closed form with a Newton polish pass. Complex
/// values come out as exact conjugate pairs. Sorted by real part
/// descending, then imaginary part descending.
EigenTriple eigenvalues_3x3(const Eigen::Matrix3d& m);

/// Sort eigenvalues with the same ordering eigenvalues_3x3 uses.
EigenTriple sort_eigenvalues(EigenTriple eigs);

/// Sign-based classification with hyperbolicity tolerance eps_h on Re.
/// Any |Re| <= eps_h is reported Nonhyperbolic rather than guessed.
StabilityClass classify(const EigenTriple& eigs, double eps_h = 1e-9);

}  // namespace epibif
