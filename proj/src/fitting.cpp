#include "horseshoe/fitting.hpp"

#include <algorithm>
#include <cmath>

#include "horseshoe/parallel.hpp"

namespace hs {

ScalarField2 denoise(const ScalarField2& f, double rel) {
    double scale = 0.0;
    for (double c : f.coeffs()) scale = std::max(scale, std::abs(c));
    std::vector<double> c = f.coeffs();
    for (double& v : c)
        if (std::abs(v) <= rel * scale) v = 0.0;
    ScalarField2 g(f.domain(), f.degree_y(), f.degree_x(), std::move(c));
    return g.trimmed(0.0);
}

BundleFit fit_bundle(const Rect& dom, int k, const std::function<void(double, double, double*)>& node, double tol,
                     int max_degree) {
    BundleFit out;
    std::vector<double> prev;
    int prev_n = 0;
    for (int n = 4; n <= max_degree; n *= 2) {
        auto s = lobatto_nodes(n);
        std::size_t m = static_cast<std::size_t>(n + 1) * (n + 1);
        std::vector<double> vals(m * k);
        std::vector<std::size_t> todo;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                std::size_t slot = static_cast<std::size_t>(i) * (n + 1) + j;
                if (prev_n > 0 && i % 2 == 0 && j % 2 == 0) {
                    std::size_t ps = static_cast<std::size_t>(i / 2) * (prev_n + 1) + j / 2;
                    std::copy_n(&prev[ps * k], k, &vals[slot * k]);
                } else {
                    todo.push_back(slot);
                }
            }
        parallel_for(todo.size(), [&](std::size_t q) {
            std::size_t slot = todo[q];
            int i = static_cast<int>(slot / (n + 1)), j = static_cast<int>(slot % (n + 1));
            node(from_unit(dom.y, s[i]), from_unit(dom.x, s[j]), &vals[slot * k]);
        });
        out.fields.clear();
        out.tail = 0.0;
        std::vector<double> one(m);
        for (int f = 0; f < k; ++f) {
            for (std::size_t q = 0; q < m; ++q) one[q] = vals[q * k + f];
            ScalarField2 fld = ScalarField2::from_node_values(dom, n, n, one);
            double scale = 0.0, tail = 0.0;
            for (int i = 0; i <= n; ++i)
                for (int j = 0; j <= n; ++j) {
                    double c = std::abs(fld.coeff(i, j));
                    scale = std::max(scale, c);
                    if (i >= n - 1 || j >= n - 1) tail = std::max(tail, c);
                }
            out.tail = std::max(out.tail, scale > 0.0 ? tail / scale : 0.0);
            out.fields.push_back(std::move(fld));
        }
        out.degree = n;
        out.converged = out.tail <= tol;
        prev = std::move(vals);
        prev_n = n;
        if (out.converged) break;
    }
    for (auto& f : out.fields) f = denoise(f);
    return out;
}

}  // namespace hs
