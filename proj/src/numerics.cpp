#include "evdemand/numerics.hpp"

#include <algorithm>

namespace evd {

NelderMeadResult nelder_mead_2d(const std::function<double(double, double)>& f,
                                std::array<double, 2> start, std::array<double, 2> step,
                                int max_iterations, double ftol) {
    using Point = std::array<double, 2>;
    struct Vertex {
        Point x;
        double fx;
    };
    auto eval = [&](const Point& p) { return f(p[0], p[1]); };

    std::array<Vertex, 3> s;
    s[0] = {start, eval(start)};
    s[1] = {{start[0] + step[0], start[1]}, 0.0};
    s[1].fx = eval(s[1].x);
    s[2] = {{start[0], start[1] + step[1]}, 0.0};
    s[2].fx = eval(s[2].x);

    NelderMeadResult res;
    int iter = 0;
    for (; iter < max_iterations; ++iter) {
        std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; });
        if (std::abs(s[2].fx - s[0].fx) <= ftol * (std::abs(s[0].fx) + ftol)) break;

        const Point centroid{0.5 * (s[0].x[0] + s[1].x[0]), 0.5 * (s[0].x[1] + s[1].x[1])};
        auto along = [&](double t) {
            return Point{centroid[0] + t * (centroid[0] - s[2].x[0]),
                         centroid[1] + t * (centroid[1] - s[2].x[1])};
        };

        const Point xr = along(1.0);
        const double fr = eval(xr);
        if (fr < s[0].fx) {
            const Point xe = along(2.0);
            const double fe = eval(xe);
            s[2] = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
        } else if (fr < s[1].fx) {
            s[2] = {xr, fr};
        } else {
            const Point xc = along(fr < s[2].fx ? 0.5 : -0.5);
            const double fc = eval(xc);
            if (fc < std::min(fr, s[2].fx)) {
                s[2] = {xc, fc};
            } else {
                // shrink toward the best vertex
                for (int i = 1; i < 3; ++i) {
                    s[i].x = {0.5 * (s[0].x[0] + s[i].x[0]), 0.5 * (s[0].x[1] + s[i].x[1])};
                    s[i].fx = eval(s[i].x);
                }
            }
        }
    }
    std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; });
    res.x = s[0].x;
    res.fmin = s[0].fx;
    res.iterations = iter;
    res.converged = iter < max_iterations;
    return res;
}

}  // namespace evd
