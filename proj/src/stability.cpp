#include "epibif/stability.hpp"

#include <algorithm>
#include <cmath>

namespace epibif {

std::string to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::StableNode: return "stable-node";
        case StabilityClass::StableFocus: return "stable-focus";
        case StabilityClass::Saddle: return "saddle";
        case StabilityClass::UnstableNode: return "unstable-node";
        case StabilityClass::UnstableFocus: return "unstable-focus";
        case StabilityClass::Nonhyperbolic: return "nonhyperbolic";
    }
    return "?";
}

namespace {

// One guarded Newton step on y^3 + p y + q; stays put near multiple roots.
double polish_real_root(double y, double p, double q) {
    for (int it = 0; it < 2; ++it) {
        const double g = (y * y + p) * y + q;
        const double gp = 3.0 * y * y + p;
        const double scale = 3.0 * y * y + std::abs(p) + 1e-300;
        if (std::abs(gp) < 1e-3 * scale) break;
        y -= g / gp;
    }
    return y;
}

}  // namespace

EigenTriple sort_eigenvalues(EigenTriple eigs) {
    std::sort(eigs.begin(), eigs.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return eigs;
}

EigenTriple eigenvalues_3x3(const Eigen::Matrix3d& m) {
    const double s = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    const Eigen::Matrix3d A = m / s;

    // characteristic polynomial l^3 - c2 l^2 + c1 l - c0
    const double c2 = A.trace();
    const double c1 = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0) + A(0, 0) * A(2, 2) -
                      A(0, 2) * A(2, 0) + A(1, 1) * A(2, 2) - A(1, 2) * A(2, 1);
    const double c0 = A.determinant();

    // depressed cubic y^3 + p y + q, l = y + c2/3
    const double a = c2 / 3.0;
    const double p = c1 - c2 * c2 / 3.0;
    const double q = -2.0 * c2 * c2 * c2 / 27.0 + c1 * c2 / 3.0 - c0;

    const double quarter = q * q / 4.0 + p * p * p / 27.0;  // negative: three real roots

    EigenTriple roots;
    if (quarter <= 0.0) {
        if (p >= 0.0) {
            // only possible with p ~ 0, q ~ 0: (near-)triple root
            roots = {std::complex<double>(0.0), std::complex<double>(0.0),
                     std::complex<double>(0.0)};
        } else {
            const double rho = 2.0 * std::sqrt(-p / 3.0);
            double argument = 3.0 * q / (p * rho);
            argument = std::clamp(argument, -1.0, 1.0);
            const double phi = std::acos(argument);
            for (int k = 0; k < 3; ++k) {
                double y = rho * std::cos((phi - 2.0 * M_PI * k) / 3.0);
                roots[k] = polish_real_root(y, p, q);
            }
        }
    } else if (q == 0.0) {
        // y (y^2 + p) with p > 0
        roots[0] = std::complex<double>(0.0);
        roots[1] = std::complex<double>(0.0, std::sqrt(p));
        roots[2] = std::complex<double>(0.0, -std::sqrt(p));
    } else {
        const double r = std::sqrt(quarter);
        const double u3 = -q / 2.0 - std::copysign(r, q);  // larger-magnitude branch
        const double u = std::cbrt(u3);
        const double v = -p / (3.0 * u);
        double y1 = polish_real_root(u + v, p, q);
        // deflated quadratic y^2 + y1 y + (y1^2 + p)
        const double disc = 3.0 * y1 * y1 + 4.0 * p;
        const double im = 0.5 * std::sqrt(std::max(disc, 0.0));
        roots[0] = y1;
        roots[1] = std::complex<double>(-y1 / 2.0, im);
        roots[2] = std::complex<double>(-y1 / 2.0, -im);
    }

    EigenTriple out;
    for (int k = 0; k < 3; ++k) out[k] = s * (roots[k] + a);
    return sort_eigenvalues(out);
}

StabilityClass classify(const EigenTriple& eigs, double eps_h) {
    bool pair = false;
    for (const auto& l : eigs)
        if (l.imag() != 0.0) pair = true;

    for (const auto& l : eigs)
        if (std::abs(l.real()) <= eps_h) return StabilityClass::Nonhyperbolic;

    int pos = 0, neg = 0;
    for (const auto& l : eigs) (l.real() > 0.0 ? pos : neg)++;
    if (pos == 3) return pair ? StabilityClass::UnstableFocus : StabilityClass::UnstableNode;
    if (neg == 3) return pair ? StabilityClass::StableFocus : StabilityClass::StableNode;
    return StabilityClass::Saddle;
}

}  // namespace epibif
