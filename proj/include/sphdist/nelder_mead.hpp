#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace sphdist {

struct NelderMeadOptions {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    /// Initial simplex: x0 and x0 + initial_scale * e_i.
    double initial_scale = 0.1;
    /// Stop once the largest vertex-to-vertex distance falls below this.
    double diameter_tol = 1e-6;
    std::size_t max_evals = 2000;
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
    std::size_t iterations = 0;
    bool converged = false;
    bool max_evals_reached = false;
    /// Best objective value after initialization and after every iteration.
    std::vector<double> best_trace;
};

/// Derivative-free minimization; objective values may be +inf (infeasible).
///
/// Deterministic for a deterministic objective. With zero dimensions the
/// objective is evaluated once at x0.
template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, const NelderMeadOptions& opt = {}) {
    using Point = std::vector<double>;
    const std::size_t dim = x0.size();
    NelderMeadResult out;

    auto eval = [&](const Point& x) {
        ++out.evaluations;
        return static_cast<double>(f(x));
    };
    auto budget_left = [&] { return out.evaluations < opt.max_evals; };

    std::vector<Point> vertices{x0};
    std::vector<double> values{eval(x0)};
    for (std::size_t i = 0; i < dim && budget_left(); ++i) {
        Point v = x0;
        v[i] += opt.initial_scale;
        values.push_back(eval(v));
        vertices.push_back(std::move(v));
    }

    std::vector<std::size_t> order(vertices.size());
    auto sort_vertices = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        // Stable on ties so earlier vertices win; keeps runs reproducible.
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<Point> v2;
        std::vector<double> f2;
        for (std::size_t i : order) {
            v2.push_back(vertices[i]);
            f2.push_back(values[i]);
        }
        vertices = std::move(v2);
        values = std::move(f2);
    };
    auto diameter = [&] {
        double d = 0.0;
        for (std::size_t i = 0; i < vertices.size(); ++i)
            for (std::size_t j = i + 1; j < vertices.size(); ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < dim; ++k) s += (vertices[i][k] - vertices[j][k]) * (vertices[i][k] - vertices[j][k]);
                d = std::max(d, std::sqrt(s));
            }
        return d;
    };
    auto finish = [&] {
        sort_vertices();
        out.x = vertices.front();
        out.f = values.front();
        return out;
    };

    order.resize(vertices.size());
    sort_vertices();
    out.best_trace.push_back(values.front());
    if (dim == 0) {
        out.converged = true;
        return finish();
    }
    if (vertices.size() < dim + 1) {
        out.max_evals_reached = true;
        return finish();
    }

    auto affine = [&](const Point& base, const Point& toward, double t) {
        Point r(dim);
        for (std::size_t k = 0; k < dim; ++k) r[k] = base[k] + t * (toward[k] - base[k]);
        return r;
    };

    while (true) {
        if (diameter() < opt.diameter_tol) {
            out.converged = true;
            break;
        }
        if (!budget_left()) {
            out.max_evals_reached = true;
            break;
        }
        ++out.iterations;
        const std::size_t worst = dim;
        Point centroid(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t k = 0; k < dim; ++k) centroid[k] += vertices[i][k] / static_cast<double>(dim);

        const Point xr = affine(centroid, vertices[worst], -opt.reflection);
        const double fr = eval(xr);
        bool do_shrink = false;
        if (fr < values[0]) {
            if (budget_left()) {
                const Point xe = affine(centroid, xr, opt.expansion);
                const double fe = eval(xe);
                if (fe < fr) {
                    vertices[worst] = xe;
                    values[worst] = fe;
                } else {
                    vertices[worst] = xr;
                    values[worst] = fr;
                }
            } else {
                vertices[worst] = xr;
                values[worst] = fr;
            }
        } else if (fr < values[dim - 1]) {
            vertices[worst] = xr;
            values[worst] = fr;
        } else if (budget_left()) {
            if (fr < values[worst]) {
                const Point xc = affine(centroid, xr, opt.contraction);
                const double fc = eval(xc);
                if (fc <= fr) {
                    vertices[worst] = xc;
                    values[worst] = fc;
                } else {
                    do_shrink = true;
                }
            } else {
                const Point xcc = affine(centroid, vertices[worst], opt.contraction);
                const double fcc = eval(xcc);
                if (fcc < values[worst]) {
                    vertices[worst] = xcc;
                    values[worst] = fcc;
                } else {
                    do_shrink = true;
                }
            }
        }
        if (do_shrink) {
            for (std::size_t i = 1; i <= dim && budget_left(); ++i) {
                vertices[i] = affine(vertices[0], vertices[i], opt.shrink);
                values[i] = eval(vertices[i]);
            }
        }
        sort_vertices();
        out.best_trace.push_back(values.front());
    }
    return finish();
}

}  // namespace sphdist
