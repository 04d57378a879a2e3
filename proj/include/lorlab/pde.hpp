#pragma once

// Divergence-form p-d'Alembertian on the grid, its energy functional, the
// distributional comparison check, and a constrained p-harmonic solver.
//
// Discretization: the energy is assembled from cell-averaged gradients
// (corner differences on each grid cell), and the operator is its exact
// variational derivative.  Weak-form pairings then satisfy discrete
// integration by parts identically, which is what the comparison test needs.

#include <cmath>
#include <functional>
#include <vector>

#include "lorlab/busemann.hpp"
#include "lorlab/causal_dp.hpp"
#include "lorlab/cone.hpp"
#include "lorlab/grid.hpp"

namespace lorlab {

struct PdeOptions {
    double gradient_clamp = 1e-6;  // |grad u|_F floor inside the flux exponent
};

namespace pde_detail {

struct CellIter {
    const Grid* grid;
    std::vector<int> cells_per_axis;

    explicit CellIter(const Grid& g) : grid(&g) {
        cells_per_axis.resize(g.dim());
        for (int a = 0; a < g.dim(); ++a)
            cells_per_axis[a] = g.chart().periodic[a] ? g.shape()[a] : g.shape()[a] - 1;
    }

    long count() const {
        long c = 1;
        for (int v : cells_per_axis) c *= v;
        return c;
    }

    std::vector<int> unflat(long f) const {
        std::vector<int> idx(grid->dim());
        for (int a = grid->dim() - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(f % cells_per_axis[a]);
            f /= cells_per_axis[a];
        }
        return idx;
    }

    // Corner node flat indices of cell `cidx` (2^n of them), bit a of the
    // corner code selects the +e_a corner.
    void corners(const std::vector<int>& cidx, std::vector<long>& out) const {
        const int n = grid->dim();
        out.resize(1 << n);
        std::vector<int> node(n);
        for (int code = 0; code < (1 << n); ++code) {
            for (int a = 0; a < n; ++a) {
                int j = cidx[a] + ((code >> a) & 1);
                if (grid->chart().periodic[a]) j %= grid->shape()[a];
                node[a] = j;
            }
            out[code] = grid->flat(node);
        }
    }

    VecN center(const std::vector<int>& cidx) const {
        const int n = grid->dim();
        VecN x(n);
        for (int a = 0; a < n; ++a)
            x[a] = grid->chart().box[a][0] + grid->spacing()[a] * (cidx[a] + 0.5);
        return x;
    }
};

// Cell-averaged gradient: du_a = mean over the 2^(n-1) edges along axis a.
inline VecN cell_gradient(const Grid& grid, const std::vector<double>& u,
                          const std::vector<long>& corners) {
    const int n = grid.dim();
    VecN du = VecN::Zero(n);
    const double scale = 1.0 / (1 << (n - 1));
    for (int a = 0; a < n; ++a) {
        double s = 0.0;
        for (int code = 0; code < (1 << n); ++code) {
            if ((code >> a) & 1) continue;
            s += u[corners[code | (1 << a)]] - u[corners[code]];
        }
        du[a] = scale * s / grid.spacing()[a];
    }
    return du;
}

struct CellData {
    VecN du;        // covariant gradient (cell average)
    VecN grad_up;   // raised gradient g^{-1} du
    double norm;    // |du|_{F*} (unclamped)
    double weight;  // sqrt|det g| * prod(h)
    bool admissible;
};

inline CellData cell_data(const Grid& grid, const std::vector<double>& u, const CellIter& ci,
                          const std::vector<int>& cidx, std::vector<long>& corner_buf) {
    ci.corners(cidx, corner_buf);
    CellData cd;
    cd.du = cell_gradient(grid, u, corner_buf);
    const VecN x = ci.center(cidx);
    const MatN g = grid.chart().metric_at(x);
    cd.grad_up = g.inverse() * cd.du;
    const double quad = cd.du.dot(cd.grad_up);
    double cellvol = std::sqrt(std::abs(g.determinant()));
    for (int a = 0; a < grid.dim(); ++a) cellvol *= grid.spacing()[a];
    cd.weight = cellvol;
    const MetricValue gm{g, 1.0};
    const CausalClass cc = classify(cd.grad_up, gm);
    cd.admissible = (cc == CausalClass::Timelike) && quad > 0.0;
    cd.norm = cd.admissible ? std::sqrt(quad) : 0.0;
    return cd;
}

}  // namespace pde_detail

struct PDalembertian {
    ScalarField value;     // box_p u; masked where any adjacent cell is inadmissible
    long masked_nodes = 0;
    long clamped_cells = 0;
};

// box_p u = -div(|grad u|_F^{p-2} grad u), assembled as the exact variational
// derivative of the cell energy, normalized by the nodal volume weight.
inline PDalembertian p_dalembertian(const ScalarField& u, const PExponent& pq,
                                    const PdeOptions& opts = {}) {
    const Grid& grid = *u.grid;
    const int n = grid.dim();
    const double p = pq.p();
    pde_detail::CellIter ci(grid);
    std::vector<double> dEdu(grid.size(), 0.0);
    std::vector<uint8_t> node_ok(grid.size(), 1);
    std::vector<long> corners;
    PDalembertian out{ScalarField(grid), 0, 0};
    const double scale = 1.0 / (1 << (n - 1));
    for (long c = 0; c < ci.count(); ++c) {
        const std::vector<int> cidx = ci.unflat(c);
        const pde_detail::CellData cd = pde_detail::cell_data(grid, u.values, ci, cidx, corners);
        bool cell_valid = cd.admissible;
        for (long f : corners)
            if (!u.valid(f)) cell_valid = false;
        if (!cell_valid) {
            for (long f : corners) node_ok[f] = 0;
            continue;
        }
        double nrm = cd.norm;
        if (nrm < opts.gradient_clamp) {
            nrm = opts.gradient_clamp;
            ++out.clamped_cells;
        }
        // True derivative of H(w) = -(1/p)|w|^p:  DH = -|w|^{p-2} g^{-1} w.
        const VecN dh = -std::pow(nrm, p - 2.0) * cd.grad_up;
        for (int a = 0; a < n; ++a) {
            const double coef = cd.weight * dh[a] * scale / grid.spacing()[a];
            for (int code = 0; code < (1 << n); ++code) {
                if ((code >> a) & 1) continue;
                dEdu[corners[code | (1 << a)]] += coef;
                dEdu[corners[code]] -= coef;
            }
        }
    }
    for (long i = 0; i < grid.size(); ++i) {
        const std::vector<int> idx = grid.unflat(i);
        if (!grid.interior(idx) || !node_ok[i] || !u.valid(i)) {
            out.value.mask[i] = 0;
            ++out.masked_nodes;
            continue;
        }
        double w = std::sqrt(std::abs(grid.chart().metric_at(grid.point(idx)).determinant()));
        for (int a = 0; a < n; ++a) w *= grid.spacing()[a];
        out.value.values[i] = -dEdu[i] / w;
    }
    return out;
}

struct EnergyResult {
    XReal energy;               // +inf sentinel when any cell is inadmissible
    long inadmissible_cells = 0;
    long clamped_cells = 0;
};

// Midpoint-quadrature energy E(u) = sum_cells H(du) sqrt|g| vol.
inline EnergyResult energy_functional(const ScalarField& u, const PExponent& pq,
                                      const PdeOptions& opts = {}) {
    const Grid& grid = *u.grid;
    pde_detail::CellIter ci(grid);
    std::vector<long> corners;
    EnergyResult res;
    double e = 0.0;
    for (long c = 0; c < ci.count(); ++c) {
        const pde_detail::CellData cd =
            pde_detail::cell_data(grid, u.values, ci, ci.unflat(c), corners);
        if (!cd.admissible) {
            ++res.inadmissible_cells;
            continue;
        }
        double nrm = cd.norm;
        if (nrm < opts.gradient_clamp) {
            nrm = opts.gradient_clamp;
            ++res.clamped_cells;
        }
        e += -std::pow(nrm, pq.p()) / pq.p() * cd.weight;
    }
    res.energy = res.inadmissible_cells > 0 ? XReal::pos_inf() : XReal(e);
    return res;
}

// E((1-l) u0 + l u1) <= (1-l) E(u0) + l E(u1) + tol on a lambda grid.
// Returns the worst violation (negative or zero means convex here).
inline double convexity_probe(const ScalarField& u0, const ScalarField& u1, const PExponent& pq,
                              const std::vector<double>& lambdas = {0.25, 0.5, 0.75}) {
    const double e0 = energy_functional(u0, pq).energy.value();
    const double e1 = energy_functional(u1, pq).energy.value();
    double worst = -std::numeric_limits<double>::infinity();
    for (double l : lambdas) {
        ScalarField mix(*u0.grid);
        for (long i = 0; i < u0.grid->size(); ++i)
            mix.values[i] = (1.0 - l) * u0.values[i] + l * u1.values[i];
        const double em = energy_functional(mix, pq).energy.value();
        worst = std::max(worst, em - ((1.0 - l) * e0 + l * e1));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Weak comparison (distributional form)

// Tensor-product C^infty bump, phi(x) = prod_a psi((x_a - c_a)/w_a) with
// psi(s) = exp(1 - 1/(1-s^2)) on |s| < 1.
struct TestBump {
    VecN center;
    VecN width;

    double operator()(const VecN& x) const {
        double v = 1.0;
        for (int a = 0; a < x.size(); ++a) {
            const double s = (x[a] - center[a]) / width[a];
            if (std::abs(s) >= 1.0) return 0.0;
            v *= std::exp(1.0 - 1.0 / (1.0 - s * s));
        }
        return v;
    }
};

// Default battery: sizes x centers tensor bumps inside the given window.
inline std::vector<TestBump> make_bumps(const std::vector<std::array<double, 2>>& window,
                                        int sizes = 5, int centers = 5) {
    const int n = static_cast<int>(window.size());
    std::vector<TestBump> out;
    VecN half(n), mid(n);
    for (int a = 0; a < n; ++a) {
        half[a] = 0.5 * (window[a][1] - window[a][0]);
        mid[a] = 0.5 * (window[a][1] + window[a][0]);
    }
    for (int s = 0; s < sizes; ++s) {
        const double frac = 0.95 * std::pow(0.75, s);
        for (int c = 0; c < centers; ++c) {
            // centers along the window diagonal, kept inside the support
            const double t = centers == 1 ? 0.0 : (2.0 * c / (centers - 1.0) - 1.0);
            TestBump b;
            b.width = frac * half;
            b.center = mid + t * (half - b.width);
            out.push_back(b);
        }
    }
    return out;
}

struct ComparisonEntry {
    double lhs = 0.0;
    double rhs = 0.0;
    bool skipped = false;
};

struct ComparisonReport {
    std::vector<ComparisonEntry> entries;
    double max_violation = -std::numeric_limits<double>::infinity();  // max(lhs - rhs)
    double max_rel_gap = 0.0;  // max |lhs - rhs| / |rhs| over evaluated bumps
    int evaluated = 0;
    int skipped = 0;
    bool verdict(double tol) const { return max_violation <= tol; }
};

// Checks int g(grad phi, grad b / |grad b|^{2-p}) dvol <= (n-1) int phi / l
// for each test function, with both sides assembled by the same quadrature.
inline ComparisonReport weak_comparison_check(const BusemannField& bfield, const PExponent& pq,
                                              const std::vector<TestBump>& bumps,
                                              const PdeOptions& opts = {}) {
    const Grid& grid = *bfield.values.grid;
    const int n = grid.dim();
    const double p = pq.p();
    pde_detail::CellIter ci(grid);
    std::vector<long> corners;
    ComparisonReport rep;
    for (const TestBump& bump : bumps) {
        ComparisonEntry e;
        // Support must avoid masked nodes and the ell = 0 locus.
        bool usable = true;
        std::vector<double> phi(grid.size(), 0.0);
        for (long i = 0; i < grid.size(); ++i) {
            phi[i] = bump(grid.point(i));
            if (phi[i] > 0.0 &&
                (!bfield.values.valid(i) || !bfield.ell.valid(i) ||
                 bfield.ell.values[i] <= 0.0 || !grid.interior(grid.unflat(i))))
                usable = false;
        }
        if (!usable) {
            e.skipped = true;
            rep.entries.push_back(e);
            ++rep.skipped;
            continue;
        }
        for (long c = 0; c < ci.count(); ++c) {
            const std::vector<int> cidx = ci.unflat(c);
            const pde_detail::CellData cd =
                pde_detail::cell_data(grid, bfield.values.values, ci, cidx, corners);
            const VecN dphi = pde_detail::cell_gradient(grid, phi, corners);
            if (dphi.isZero()) continue;
            if (!cd.admissible) continue;
            const double nrm = std::max(cd.norm, opts.gradient_clamp);
            e.lhs += cd.weight * std::pow(nrm, p - 2.0) * dphi.dot(cd.grad_up);
        }
        for (long i = 0; i < grid.size(); ++i) {
            if (phi[i] == 0.0) continue;
            double w = std::sqrt(std::abs(grid.chart().metric_at(grid.point(i)).determinant()));
            for (int a = 0; a < n; ++a) w *= grid.spacing()[a];
            e.rhs += (n - 1) * w * phi[i] / bfield.ell.values[i];
        }
        rep.entries.push_back(e);
        ++rep.evaluated;
        rep.max_violation = std::max(rep.max_violation, e.lhs - e.rhs);
        if (e.rhs != 0.0)
            rep.max_rel_gap = std::max(rep.max_rel_gap, std::abs(e.lhs - e.rhs) / std::abs(e.rhs));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// p-harmonic solver

struct SolveResult {
    ScalarField u;
    double residual = 0.0;  // max |box_p u - f| over interior nodes
    bool converged = false;
    int iterations = 0;
    double energy = 0.0;
};

// Minimizes E(u) (+ source pairing) over interior values with Dirichlet data
// on the remaining nodes; Barzilai-Borwein steps with backtracking, steps
// rejected when a cell gradient leaves the dual cone.
inline SolveResult p_harmonic_solve(const ScalarField& boundary, const PExponent& pq,
                                    int max_iter = 2000, const ScalarField* source = nullptr,
                                    const PdeOptions& opts = {}, double residual_target = 1e-8) {
    const Grid& grid = *boundary.grid;
    const int n = grid.dim();
    SolveResult res{ScalarField(grid), 0.0, false, 0, 0.0};
    std::vector<uint8_t> free_node(grid.size(), 0);
    res.u.values = boundary.values;
    for (long i = 0; i < grid.size(); ++i) free_node[i] = grid.interior(grid.unflat(i)) ? 1 : 0;
    // Warm start: a few hundred Jacobi sweeps of the flat Laplacian pull the
    // interior onto a smooth interpolant of the boundary data.
    {
        std::vector<double> next = res.u.values;
        for (int sweep = 0; sweep < 400; ++sweep) {
            for (long i = 0; i < grid.size(); ++i) {
                if (!free_node[i]) continue;
                const std::vector<int> idx = grid.unflat(i);
                double s = 0.0;
                int cnt = 0;
                for (int a = 0; a < n; ++a) {
                    for (int d : {-1, +1}) {
                        std::vector<int> j = idx;
                        j[a] += d;
                        if (grid.chart().periodic[a])
                            j[a] = (j[a] + grid.shape()[a]) % grid.shape()[a];
                        else if (j[a] < 0 || j[a] >= grid.shape()[a])
                            continue;
                        s += res.u.values[grid.flat(j)];
                        ++cnt;
                    }
                }
                next[i] = s / cnt;
            }
            std::swap(next, res.u.values);
        }
    }
    auto total_energy = [&](const ScalarField& u) -> double {
        const EnergyResult er = energy_functional(u, pq, opts);
        if (!er.energy.finite()) return std::numeric_limits<double>::infinity();
        double e = er.energy.value();
        if (source) {
            for (long i = 0; i < grid.size(); ++i) {
                if (!free_node[i]) continue;
                double w = std::sqrt(
                    std::abs(grid.chart().metric_at(grid.point(i)).determinant()));
                for (int a = 0; a < n; ++a) w *= grid.spacing()[a];
                e += source->values[i] * u.values[i] * w;
            }
        }
        return e;
    };
    auto gradient = [&](const ScalarField& u, std::vector<double>& g) {
        const PDalembertian box = p_dalembertian(u, pq, opts);
        for (long i = 0; i < grid.size(); ++i) {
            if (!free_node[i] || !box.value.valid(i)) {
                g[i] = 0.0;
                continue;
            }
            double w = std::sqrt(std::abs(grid.chart().metric_at(grid.point(i)).determinant()));
            for (int a = 0; a < n; ++a) w *= grid.spacing()[a];
            // dE/du = -box_p u * w (+ f * w)
            g[i] = -box.value.values[i] * w + (source ? source->values[i] * w : 0.0);
        }
    };
    double e_cur = total_energy(res.u);
    if (std::isinf(e_cur))
        throw std::domain_error("p_harmonic_solve: boundary data admits no cone-feasible start");
    std::vector<double> g(grid.size()), g_prev(grid.size()), u_prev;
    gradient(res.u, g);
    double step = 1.0;
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it + 1;
        double gnorm = 0.0;
        for (double v : g) gnorm = std::max(gnorm, std::abs(v));
        if (gnorm == 0.0) break;
        bool accepted = false;
        double s = step;
        for (int bt = 0; bt < 50; ++bt) {
            ScalarField trial = res.u;
            for (long i = 0; i < grid.size(); ++i) trial.values[i] -= s * g[i];
            const double e_t = total_energy(trial);  // +inf if a cell leaves the cone
            if (e_t < e_cur) {
                u_prev = res.u.values;
                g_prev = g;
                res.u = std::move(trial);
                e_cur = e_t;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) break;
        gradient(res.u, g);
        // Barzilai-Borwein step from the last accepted pair.
        double sy = 0.0, ss = 0.0;
        for (long i = 0; i < grid.size(); ++i) {
            const double du = res.u.values[i] - u_prev[i];
            const double dg = g[i] - g_prev[i];
            sy += du * dg;
            ss += du * du;
        }
        step = (sy > 0.0 && ss > 0.0) ? ss / sy : s * 2.0;
        // Residual check
        const PDalembertian box = p_dalembertian(res.u, pq, opts);
        double r = 0.0;
        for (long i = 0; i < grid.size(); ++i) {
            if (!free_node[i] || !box.value.valid(i)) continue;
            const double f = source ? source->values[i] : 0.0;
            r = std::max(r, std::abs(box.value.values[i] - f));
        }
        res.residual = r;
        if (r < residual_target) {
            res.converged = true;
            break;
        }
    }
    res.energy = e_cur;
    if (res.residual == 0.0) {
        const PDalembertian box = p_dalembertian(res.u, pq, opts);
        double r = 0.0;
        for (long i = 0; i < grid.size(); ++i) {
            if (!free_node[i] || !box.value.valid(i)) continue;
            const double f = source ? source->values[i] : 0.0;
            r = std::max(r, std::abs(box.value.values[i] - f));
        }
        res.residual = r;
    }
    return res;
}

}  // namespace lorlab
