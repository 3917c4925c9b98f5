#pragma once

#include <string>
#include <vector>

#include "hermcurv/curvature.hpp"

namespace hermcurv {

// One stored reference value compared over a point set (worst point kept).
struct GoldenCheck {
    std::string quantity;
    double expected = 0.0;
    double got = 0.0;     // value at the worst point (scaled as in `quantity`)
    double defect = 0.0;  // max |got - expected| over the points
    bool pass = false;
};

struct GoldenResult {
    std::string manifold;
    std::vector<GoldenCheck> checks;
    bool pass() const;
};

// Builtins carrying stored reference values: hopf, elliptic, inoue1, inoue2, flat-torus.
bool has_golden(const ModelManifold& man);

// Throws PreconditionError for manifolds without stored values.
GoldenResult golden_check(const ModelManifold& man, const std::vector<ChartPoint>& points, double tol = 1e-8);

}  // namespace hermcurv
