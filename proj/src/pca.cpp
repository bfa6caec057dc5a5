#include "slideflow/pca.hpp"

#include <cmath>

#include "slideflow/errors.hpp"

namespace slideflow {

namespace {

// Flip so the largest-magnitude coordinate is positive; |x| == |y| resolves
// toward x. Keeps the axis choice deterministic across platforms.
std::array<double, 2> fix_sign(std::array<double, 2> v) {
    double key = std::abs(v[0]) >= std::abs(v[1]) ? v[0] : v[1];
    if (key < 0.0) {
        v[0] = -v[0];
        v[1] = -v[1];
    }
    return v;
}

}  // namespace

Pca2 pca_2d(std::span<const std::array<double, 2>> pts) {
    require(pts.size() >= 2, "pca_2d: needs at least 2 points");
    Pca2 out;
    double n = static_cast<double>(pts.size());
    for (const auto& p : pts) {
        out.centroid[0] += p[0];
        out.centroid[1] += p[1];
    }
    out.centroid[0] /= n;
    out.centroid[1] /= n;

    double a = 0.0, b = 0.0, c = 0.0;  // cov_xx, cov_xy, cov_yy
    for (const auto& p : pts) {
        double dx = p[0] - out.centroid[0], dy = p[1] - out.centroid[1];
        a += dx * dx;
        b += dx * dy;
        c += dy * dy;
    }
    a /= n;
    b /= n;
    c /= n;

    double half_tr = 0.5 * (a + c);
    double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    out.lambda1 = half_tr + disc;
    out.lambda2 = std::max(0.0, half_tr - disc);
    out.eigen_tie = out.lambda1 - out.lambda2 <= 1e-9 * out.lambda1;

    if (out.lambda1 < 1e-12 || out.lambda2 < 1e-12 * out.lambda1) {
        // Coincident or collinear point set: canonical axes.
        out.degenerate = true;
        return out;
    }
    if (out.eigen_tie) return out;  // isotropic: canonical axes, tie flagged

    // (A - lambda I) v = 0 gives two candidate eigenvectors; take the better
    // conditioned one.
    std::array<double, 2> va{b, out.lambda1 - a};
    std::array<double, 2> vb{out.lambda1 - c, b};
    double na = std::hypot(va[0], va[1]), nb = std::hypot(vb[0], vb[1]);
    std::array<double, 2> u = na >= nb ? va : vb;
    double nu = std::max(na, nb);
    u[0] /= nu;
    u[1] /= nu;
    out.u1 = fix_sign(u);
    out.u2 = fix_sign({-out.u1[1], out.u1[0]});
    return out;
}

}  // namespace slideflow
