#include "aqua/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace aqua {

ScalarMinResult brent_minimize(const std::function<double(double)>& f, double lo,
                               double hi, double tol, int max_iter) {
    if (!(lo < hi)) throw std::invalid_argument("brent_minimize: need lo < hi");
    constexpr double gold = 0.3819660112501051;  // 2 - phi

    double a = lo, b = hi;
    double x = a + gold * (b - a);
    double w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    int evals = 1;
    double d = 0.0, e = 0.0;

    ScalarMinResult out;
    for (int it = 0; it < max_iter; ++it) {
        const double xm = 0.5 * (a + b);
        const double tol1 = tol * std::fabs(x) + 1e-12;
        const double tol2 = 2.0 * tol1;
        if (std::fabs(x - xm) <= tol2 - 0.5 * (b - a)) {
            out.converged = true;
            break;
        }
        bool golden = true;
        if (std::fabs(e) > tol1) {
            // Parabola through (v,fv), (w,fw), (x,fx).
            const double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::fabs(q);
            const double e_old = e;
            e = d;
            if (std::fabs(p) < std::fabs(0.5 * q * e_old) && p > q * (a - x) &&
                p < q * (b - x)) {
                d = p / q;
                double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = (xm > x) ? tol1 : -tol1;
                golden = false;
            }
        }
        if (golden) {
            e = (x >= xm) ? a - x : b - x;
            d = gold * e;
        }
        const double u = (std::fabs(d) >= tol1) ? x + d : x + (d > 0 ? tol1 : -tol1);
        const double fu = f(u);
        ++evals;
        if (fu <= fx) {
            if (u >= x)
                a = x;
            else
                b = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x)
                a = u;
            else
                b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    out.x = x;
    out.f = fx;
    out.evals = evals;
    return out;
}

SimplexMinResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                             double ftol, int max_evals) {
    const int n = static_cast<int>(x0.size());
    if (step.size() != n || lower.size() != n || upper.size() != n)
        throw std::invalid_argument("nelder_mead: dimension mismatch");

    const auto clamp = [&](Eigen::VectorXd p) {
        for (int i = 0; i < n; ++i) p[i] = std::clamp(p[i], lower[i], upper[i]);
        return p;
    };

    std::vector<Eigen::VectorXd> xs;
    std::vector<double> fs;
    xs.push_back(clamp(x0));
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd p = x0;
        p[i] += step[i];
        xs.push_back(clamp(p));
    }
    int evals = 0;
    for (const auto& p : xs) {
        fs.push_back(f(p));
        ++evals;
    }

    std::vector<int> order(xs.size());
    const auto sort_simplex = [&] {
        for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::sort(order.begin(), order.end(), [&](int i, int j) { return fs[i] < fs[j]; });
    };

    SimplexMinResult out;
    while (evals < max_evals) {
        sort_simplex();
        const int best = order.front(), worst = order.back();
        const int second_worst = order[order.size() - 2];
        if (std::fabs(fs[worst] - fs[best]) <=
            ftol * (std::fabs(fs[worst]) + std::fabs(fs[best]) + 1e-300)) {
            out.converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i : order)
            if (i != worst) centroid += xs[i];
        centroid /= static_cast<double>(n);

        const auto eval = [&](const Eigen::VectorXd& p) {
            ++evals;
            return f(p);
        };

        Eigen::VectorXd xr = clamp(centroid + (centroid - xs[worst]));
        double fr = eval(xr);
        if (fr < fs[best]) {
            Eigen::VectorXd xe = clamp(centroid + 2.0 * (centroid - xs[worst]));
            double fe = eval(xe);
            if (fe < fr) {
                xs[worst] = xe; fs[worst] = fe;
            } else {
                xs[worst] = xr; fs[worst] = fr;
            }
        } else if (fr < fs[second_worst]) {
            xs[worst] = xr; fs[worst] = fr;
        } else {
            const bool outside = fr < fs[worst];
            Eigen::VectorXd xc = outside
                ? clamp(centroid + 0.5 * (xr - centroid))
                : clamp(centroid - 0.5 * (centroid - xs[worst]));
            double fc = eval(xc);
            if (fc < std::min(fr, fs[worst])) {
                xs[worst] = xc; fs[worst] = fc;
            } else {
                // Shrink toward the best vertex.
                for (size_t i = 0; i < xs.size(); ++i) {
                    if (static_cast<int>(i) == best) continue;
                    xs[i] = clamp(xs[best] + 0.5 * (xs[i] - xs[best]));
                    fs[i] = eval(xs[i]);
                }
            }
        }
    }
    sort_simplex();
    out.x = xs[order.front()];
    out.f = fs[order.front()];
    out.evals = evals;
    return out;
}

}  // namespace aqua
