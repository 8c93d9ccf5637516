#include "incubation/em.hpp"

namespace incubation {

namespace {

FenchelResiduals support_residuals(const Vector<double>& p, const Vector<double>& g)
{
    double lowest = 0.0;
    bool first = true;
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        if (p(j) <= 0.0) continue;
        if (first || g(j) < lowest) lowest = g(j);
        first = false;
    }
    return {lowest, std::abs(p.dot(g))};
}

} // namespace

EmResult fit_em(const WeightMatrix<double>& w, const Grid& grid, double tol, long max_iter)
{
    Vector<double> p = Vector<double>::Constant(w.cols(), 1.0 / static_cast<double>(w.cols()));
    EmResult out;
    for (out.iterations = 0;; ++out.iterations) {
        const Vector<double> g = criterion_gradient(p, w);
        out.residuals = support_residuals(p, g);
        if (out.residuals.satisfied(tol)) {
            out.converged = true;
            break;
        }
        if (out.iterations >= max_iter) break;
        Vector<double> next = p.cwiseProduct(Vector<double>::Ones(p.size()) - g);
        for (Eigen::Index j = 0; j < next.size(); ++j) {
            if (next(j) < 1e-15) next(j) = 0.0;
        }
        p = next / next.sum();
    }
    out.grid_probs.assign(p.data(), p.data() + p.size());
    out.mass = MassFunction::on_grid(grid, out.grid_probs);
    return out;
}

EmResult fit_em(const Dataset& data, const Grid& grid, double tol, long max_iter, DoublyKernel kernel)
{
    return fit_em(build_tallied_weight_matrix<double>(data, grid, kernel), grid, tol, max_iter);
}

} // namespace incubation
