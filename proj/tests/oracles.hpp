// Test-only oracles, kept independent of the library's computation paths.
#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <vector>

namespace oracles {

// Upper-tail normal probability by adaptive Simpson quadrature over the
// density; independent of erfc.
inline double normal_pdf(double t) {
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
}

inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

inline double q_upper_tail(double x) {
    if (x > 40.0) return 0.0;
    if (x < -40.0) return 1.0;
    // integrate from x to x+40 with a fine fixed grid
    return simpson(normal_pdf, x, x + 40.0, 40000);
}

// Union-find component count, independent of the BFS in the library.
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
    void unite(int a, int b) { parent[find(a)] = find(b); }
    int components() {
        int c = 0;
        for (int i = 0; i < static_cast<int>(parent.size()); ++i)
            if (find(i) == i) ++c;
        return c;
    }
};

// argmax of f over an n-point inclusive grid on [lo, hi]
inline double grid_argmax(const std::function<double(double)>& f, double lo, double hi, int n) {
    double best_x = lo, best_f = f(lo);
    for (int i = 1; i < n; ++i) {
        const double x = lo + (hi - lo) * i / (n - 1);
        const double fx = f(x);
        if (fx > best_f) {
            best_f = fx;
            best_x = x;
        }
    }
    return best_x;
}

inline double grid_max(const std::function<double(double)>& f, double lo, double hi, int n) {
    double best = f(lo);
    for (int i = 1; i < n; ++i) best = std::max(best, f(lo + (hi - lo) * i / (n - 1)));
    return best;
}

}  // namespace oracles
