#pragma once

#include <vector>

#include "wielab/common.hpp"

namespace wielab {

// Fornberg weights: coefficients w_k such that f^(m)(z) ~ sum_k w_k f(x_k)
// for the given nodes (Fornberg 1988, "Generation of finite difference
// formulas on arbitrarily spaced grids").
inline std::vector<double> fd_weights(double z, const std::vector<double>& x, int m) {
    const int n = static_cast<int>(x.size()) - 1;
    std::vector<std::vector<double>> c(n + 1, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 0; --k)
                c[j][k] = (c4 * c[j][k] - (k > 0 ? k * c[j][k - 1] : 0.0)) / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n + 1);
    for (int i = 0; i <= n; ++i) w[i] = c[i][m];
    return w;
}

struct StencilEntry {
    int index;
    double coeff;
};

// One-dimensional derivative stencil on a uniform grid of n points, spacing h,
// derivative order m, with a window of the requested width shifted inward at
// the boundary. width = m + accuracy gives the usual orders: a 3-point window
// is 2nd-order for first derivatives everywhere, a 5-point window 4th-order,
// a 7-point window 6th-order; for second derivatives the boundary-shifted
// 3-point window degrades to 1st order.
inline std::vector<StencilEntry> deriv_stencil(int n, int i, double h, int m, int width) {
    if (width > n) throw std::domain_error("deriv_stencil: grid too small for stencil width");
    int start = i - (width - 1) / 2;
    if (start < 0) start = 0;
    if (start + width > n) start = n - width;
    std::vector<double> nodes(width);
    for (int k = 0; k < width; ++k) nodes[k] = (start + k - i) * h;
    const std::vector<double> w = fd_weights(0.0, nodes, m);
    std::vector<StencilEntry> out(width);
    for (int k = 0; k < width; ++k) out[k] = StencilEntry{start + k, w[k]};
    return out;
}

}  // namespace wielab
