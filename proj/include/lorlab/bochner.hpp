#pragma once

// Covariant Hessians, the p-Bochner identity residual for eikonal fields,
// Killing verification for grad b, and the metric-splitting detector.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lorlab/cone.hpp"
#include "lorlab/curvature.hpp"
#include "lorlab/grid.hpp"

namespace lorlab {

namespace hess_detail {

// Flat index of idx + step*e_axis with periodic wrap; -1 when off the grid.
inline long shifted(const Grid& g, const std::vector<int>& idx, int axis, int step) {
    std::vector<int> j = idx;
    j[axis] += step;
    if (g.chart().periodic[axis]) {
        j[axis] = (j[axis] % g.shape()[axis] + g.shape()[axis]) % g.shape()[axis];
    } else if (j[axis] < 0 || j[axis] >= g.shape()[axis]) {
        return -1;
    }
    return g.flat(j);
}

// Central-difference gradient of a nodal array; false when the stencil
// leaves the grid or hits an invalid node.
inline bool node_gradient(const Grid& g, const std::vector<double>& u,
                          const std::vector<uint8_t>& ok, const std::vector<int>& idx, VecN& out) {
    out.resize(g.dim());
    for (int a = 0; a < g.dim(); ++a) {
        const long lp = shifted(g, idx, a, +1), lm = shifted(g, idx, a, -1);
        if (lp < 0 || lm < 0 || !ok[lp] || !ok[lm]) return false;
        out[a] = (u[lp] - u[lm]) / (2.0 * g.spacing()[a]);
    }
    return true;
}

inline const CurvatureRecord curvature_at(const MetricChart& chart, const VecN& x,
                                          const FdOptions& fd) {
    if (chart.analytic_curvature) return (*chart.analytic_curvature)(x);
    return curvature_pack(chart, x, fd);
}

}  // namespace hess_detail

struct HessianField {
    const Grid* grid = nullptr;
    std::vector<MatN> values;   // covariant Hessian per node
    std::vector<uint8_t> mask;  // 1 = stencil fit inside the valid region
    long dropped = 0;           // nodes without a full stencil

    double max_norm() const {
        double m = 0.0;
        for (long i = 0; i < static_cast<long>(values.size()); ++i)
            if (mask[i]) m = std::max(m, values[i].cwiseAbs().maxCoeff());
        return m;
    }
};

// (grad^2 u)_ij = d_i d_j u - Gamma^k_ij d_k u by central differences.
inline HessianField covariant_hessian(const ScalarField& u, const FdOptions& fd = {}) {
    const Grid& g = *u.grid;
    const int n = g.dim();
    HessianField h;
    h.grid = &g;
    h.values.assign(g.size(), MatN::Zero(n, n));
    h.mask.assign(g.size(), 0);
    for (long f = 0; f < g.size(); ++f) {
        const std::vector<int> idx = g.unflat(f);
        if (!u.valid(f)) {
            ++h.dropped;
            continue;
        }
        VecN du;
        bool ok = hess_detail::node_gradient(g, u.values, u.mask, idx, du);
        MatN dd = MatN::Zero(n, n);
        for (int i = 0; ok && i < n; ++i) {
            const long lp = hess_detail::shifted(g, idx, i, +1);
            const long lm = hess_detail::shifted(g, idx, i, -1);
            dd(i, i) = (u.values[lp] - 2.0 * u.values[f] + u.values[lm]) /
                       (g.spacing()[i] * g.spacing()[i]);
            for (int j = i + 1; ok && j < n; ++j) {
                double s = 0.0;
                for (int si : {-1, +1}) {
                    for (int sj : {-1, +1}) {
                        std::vector<int> k = idx;
                        k[i] += si;
                        k[j] += sj;
                        long lf = hess_detail::shifted(g, idx, i, si);
                        if (lf < 0) { ok = false; break; }
                        lf = hess_detail::shifted(g, g.unflat(lf), j, sj);
                        if (lf < 0 || !u.valid(lf)) { ok = false; break; }
                        s += si * sj * u.values[lf];
                    }
                    if (!ok) break;
                }
                if (!ok) break;
                dd(i, j) = dd(j, i) = s / (4.0 * g.spacing()[i] * g.spacing()[j]);
            }
        }
        if (!ok) {
            ++h.dropped;
            continue;
        }
        const std::vector<MatN> gamma =
            hess_detail::curvature_at(g.chart(), g.point(idx), fd).christoffel;
        for (int k = 0; k < n; ++k) dd -= du[k] * gamma[k];
        h.values[f] = 0.5 * (dd + dd.transpose());
        h.mask[f] = 1;
    }
    return h;
}

// Max norm of the coordinate Lie derivative (L_X g)_ij with X = grad b.
// This route never touches the Hessian assembly, so it cross-checks it.
inline double killing_check(const ScalarField& b, const FdOptions& fd = {}) {
    const Grid& g = *b.grid;
    const int n = g.dim();
    // Pass 1: X^i = g^{ij} d_j b at every node with a gradient stencil.
    std::vector<VecN> X(g.size());
    std::vector<uint8_t> xok(g.size(), 0);
    for (long f = 0; f < g.size(); ++f) {
        VecN db;
        if (!b.valid(f) || !hess_detail::node_gradient(g, b.values, b.mask, g.unflat(f), db))
            continue;
        X[f] = g.chart().metric_at(g.point(f)).inverse() * db;
        xok[f] = 1;
    }
    // Pass 2: (L_X g)_ij = X^k dg_ij/dx^k + g_kj d_i X^k + g_ik d_j X^k.
    double worst = 0.0;
    for (long f = 0; f < g.size(); ++f) {
        if (!xok[f]) continue;
        const std::vector<int> idx = g.unflat(f);
        std::vector<VecN> dX(n);  // dX[a][k] = d_a X^k
        bool ok = true;
        for (int a = 0; a < n && ok; ++a) {
            const long lp = hess_detail::shifted(g, idx, a, +1);
            const long lm = hess_detail::shifted(g, idx, a, -1);
            if (lp < 0 || lm < 0 || !xok[lp] || !xok[lm]) {
                ok = false;
                break;
            }
            dX[a] = (X[lp] - X[lm]) / (2.0 * g.spacing()[a]);
        }
        if (!ok) continue;
        const VecN x = g.point(idx);
        const MatN gm = g.chart().metric_at(x);
        const std::vector<MatN> dg =
            detail::metric_derivatives(g.chart(), x, detail::fd_steps(g.chart(), fd.step_fraction));
        MatN lie = MatN::Zero(n, n);
        for (int k = 0; k < n; ++k) lie += X[f][k] * dg[k];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    lie(i, j) += gm(k, j) * dX[i][k] + gm(i, k) * dX[j][k];
        worst = std::max(worst, lie.cwiseAbs().maxCoeff());
    }
    return worst;
}

struct BochnerOptions {
    FdOptions fd;
    double eikonal_tolerance = 0.05;  // allowed | |db|_{F*} - 1 |
    double box_tolerance = 1e-6;      // |box_p b| gate for residual2
};

struct BochnerResidual {
    ScalarField residual1;  // |A - B|, the general eikonal chain
    ScalarField residual2;  // max(|A|,|B|) where additionally |box_p b| small
    ScalarField side_a;     // Tr[(sqrt(D2H) Hess b sqrt(D2H))^2] + Ric(DH,DH)
    ScalarField side_b;     // div(H^{ij} dH_j) - H^i d_i(div H^j)
    ScalarField box_p;      // box_p b = div of the true Hamiltonian gradient
};

// Evaluates both matched sides of the p-Bochner chain.  All Hamiltonian
// derivatives here are the literal ones for H(w) = -(1/p)|w|^p, i.e.
// DH = -|w|^{p-2} g^{-1} w, so the displayed identities hold with no
// sign juggling.
inline BochnerResidual bochner_residual(const ScalarField& b, const PExponent& pq,
                                        const BochnerOptions& opts = {}) {
    const Grid& g = *b.grid;
    const int n = g.dim();
    const double p = pq.p();
    // Pass 1 (margin 1): db, H(db), DH(db), D2H(db), sqrt|g|.
    std::vector<VecN> db(g.size()), hvec(g.size());
    std::vector<double> hval(g.size(), 0.0), sg(g.size(), 0.0);
    std::vector<MatN> h2(g.size());
    std::vector<uint8_t> ok1(g.size(), 0);
    double worst_eik = 0.0;
    long worst_node = -1;
    for (long f = 0; f < g.size(); ++f) {
        if (!b.valid(f)) continue;
        const std::vector<int> idx = g.unflat(f);
        VecN w;
        if (!hess_detail::node_gradient(g, b.values, b.mask, idx, w)) continue;
        const VecN x = g.point(idx);
        const MetricValue gm = g.chart().metric(x);
        const XReal nrm = fstar_norm(w, gm);
        const double dev = nrm.finite() ? std::abs(nrm.value() - 1.0)
                                        : std::numeric_limits<double>::infinity();
        if (dev > worst_eik) {
            worst_eik = dev;
            worst_node = f;
        }
        if (!nrm.finite()) continue;
        const double nv = nrm.value();
        db[f] = w;
        hval[f] = -std::pow(nv, p) / p;
        hvec[f] = -std::pow(nv, p - 2.0) * raise_index(w, gm);
        h2[f] = hamiltonian_hessian(w, pq, gm).matrix;
        sg[f] = std::sqrt(std::abs(gm.g.determinant()));
        ok1[f] = 1;
    }
    if (worst_eik > opts.eikonal_tolerance) {
        std::ostringstream msg;
        msg << "bochner_residual: eikonal precondition violated, | |db|-1 | = " << worst_eik
            << " at node " << worst_node;
        throw std::domain_error(msg.str());
    }
    // Pass 2 (margin 2): dS = grad H(db), V^i = H^{ij} dS_j, T = div H^i.
    std::vector<VecN> V(g.size());
    std::vector<double> T(g.size(), 0.0);
    std::vector<uint8_t> ok2(g.size(), 0);
    for (long f = 0; f < g.size(); ++f) {
        if (!ok1[f]) continue;
        const std::vector<int> idx = g.unflat(f);
        VecN dS(n);
        double divh = 0.0;
        bool ok = true;
        for (int a = 0; a < n && ok; ++a) {
            const long lp = hess_detail::shifted(g, idx, a, +1);
            const long lm = hess_detail::shifted(g, idx, a, -1);
            if (lp < 0 || lm < 0 || !ok1[lp] || !ok1[lm]) {
                ok = false;
                break;
            }
            dS[a] = (hval[lp] - hval[lm]) / (2.0 * g.spacing()[a]);
            divh += (sg[lp] * hvec[lp][a] - sg[lm] * hvec[lm][a]) / (2.0 * g.spacing()[a]);
        }
        if (!ok) continue;
        V[f] = h2[f] * dS;
        T[f] = divh / sg[f];
        ok2[f] = 1;
    }
    // Pass 3 (margin 3): assemble both sides.
    BochnerResidual out{ScalarField(g, 0.0, 0), ScalarField(g, 0.0, 0), ScalarField(g, 0.0, 0),
                        ScalarField(g, 0.0, 0), ScalarField(g, 0.0, 0)};
    const HessianField hess = covariant_hessian(b, opts.fd);
    for (long f = 0; f < g.size(); ++f) {
        if (!ok2[f] || !hess.mask[f]) continue;
        const std::vector<int> idx = g.unflat(f);
        double divV = 0.0;
        VecN dT(n);
        bool ok = true;
        for (int a = 0; a < n && ok; ++a) {
            const long lp = hess_detail::shifted(g, idx, a, +1);
            const long lm = hess_detail::shifted(g, idx, a, -1);
            if (lp < 0 || lm < 0 || !ok2[lp] || !ok2[lm]) {
                ok = false;
                break;
            }
            divV += (sg[lp] * V[lp][a] - sg[lm] * V[lm][a]) / (2.0 * g.spacing()[a]);
            dT[a] = (T[lp] - T[lm]) / (2.0 * g.spacing()[a]);
        }
        if (!ok) continue;
        const VecN x = g.point(idx);
        const CurvatureRecord curv = hess_detail::curvature_at(g.chart(), x, opts.fd);
        const MatN root = sym_sqrt(h2[f]);
        const MatN m = root * hess.values[f] * root;
        const double side_a = (m * m).trace() + hvec[f].dot(curv.ricci * hvec[f]);
        const double side_b = divV / sg[f] - hvec[f].dot(dT);
        out.side_a.values[f] = side_a;
        out.side_a.mask[f] = 1;
        out.side_b.values[f] = side_b;
        out.side_b.mask[f] = 1;
        out.box_p.values[f] = T[f];
        out.box_p.mask[f] = 1;
        out.residual1.values[f] = std::abs(side_a - side_b);
        out.residual1.mask[f] = 1;
        if (std::abs(T[f]) < opts.box_tolerance) {
            out.residual2.values[f] = std::max(std::abs(side_a), std::abs(side_b));
            out.residual2.mask[f] = 1;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Splitting detector

enum class SplitVerdict { Splits, NoSplit, Inconclusive };

inline const char* to_string(SplitVerdict v) {
    switch (v) {
        case SplitVerdict::Splits: return "splits";
        case SplitVerdict::NoSplit: return "no-split";
        default: return "inconclusive";
    }
}

struct SplittingReport {
    double hess_residual = 0.0;
    double killing_residual = 0.0;
    double cross_term_residual = 0.0;
    MatN induced_metric;                // h averaged over level-set samples
    double induced_metric_min_eig = 0.0;
    double induced_ricci_min = 0.0;
    double tolerance = 0.0;             // threshold the verdict used
    long sigma_samples = 0;
    SplitVerdict verdict = SplitVerdict::Inconclusive;
    std::string note;
};

struct SplitOptions {
    FdOptions fd;
    double tolerance = 0.0;        // <= 0: self-calibrate from curvature error
    // The finite-r extrapolation leaves an O(1/(r1*r2)) tail in the Hessian
    // and Killing residuals even on exactly-splitting models; the floor
    // absorbs it for the default ladders.
    double tolerance_floor = 5e-3;
};

namespace split_detail {

// Empirical curvature-pack error against the analytic oracle, sampled on a
// coarse interior lattice; drives the default verdict tolerance.
inline double calibration_error(const Grid& g, const FdOptions& fd) {
    const MetricChart& chart = g.chart();
    if (!chart.analytic_curvature) return 0.0;
    double err = 0.0;
    std::vector<int> idx(g.dim());
    for (int s = 0; s < 5; ++s) {
        for (int a = 0; a < g.dim(); ++a)
            idx[a] = static_cast<int>((g.shape()[a] - 1) * (0.2 + 0.15 * s));
        const VecN x = g.point(idx);
        if (!chart.inside(x, 0.05 * chart.extent(0))) continue;
        const CurvatureRecord fdrec = curvature_pack(chart, x, fd);
        const CurvatureRecord an = (*chart.analytic_curvature)(x);
        err = std::max(err, (fdrec.ricci - an.ricci).cwiseAbs().maxCoeff());
        for (int k = 0; k < g.dim(); ++k)
            err = std::max(err, (fdrec.christoffel[k] - an.christoffel[k]).cwiseAbs().maxCoeff());
    }
    return err;
}

// Lowered-index Riemann R_1212 of a 2d metric lattice by finite differences;
// returns false at nodes without a full stencil.
inline bool gauss_curvature(const std::vector<std::vector<MatN>>& h, int i, int j,
                            const std::array<double, 2>& dy, const std::array<bool, 2>& wrap,
                            double& K) {
    const int ni = static_cast<int>(h.size());
    const int nj = static_cast<int>(h[0].size());
    auto at = [&](int a, int b) -> const MatN* {
        if (wrap[0]) a = (a % ni + ni) % ni;
        if (wrap[1]) b = (b % nj + nj) % nj;
        if (a < 0 || a >= ni || b < 0 || b >= nj) return nullptr;
        return &h[a][b];
    };
    // First and second derivatives of the three independent components.
    std::vector<MatN> dh(2);   // dh[a] = d_a h
    std::vector<MatN> ddh(3);  // d11, d22, d12
    const MatN* c = at(i, j);
    const MatN* ip = at(i + 1, j);
    const MatN* im = at(i - 1, j);
    const MatN* jp = at(i, j + 1);
    const MatN* jm = at(i, j - 1);
    const MatN* pp = at(i + 1, j + 1);
    const MatN* pm = at(i + 1, j - 1);
    const MatN* mp = at(i - 1, j + 1);
    const MatN* mm = at(i - 1, j - 1);
    if (!c || !ip || !im || !jp || !jm || !pp || !pm || !mp || !mm) return false;
    dh[0] = (*ip - *im) / (2.0 * dy[0]);
    dh[1] = (*jp - *jm) / (2.0 * dy[1]);
    ddh[0] = (*ip - 2.0 * (*c) + *im) / (dy[0] * dy[0]);
    ddh[1] = (*jp - 2.0 * (*c) + *jm) / (dy[1] * dy[1]);
    ddh[2] = (*pp - *pm - *mp + *mm) / (4.0 * dy[0] * dy[1]);
    // Gamma^m_{ab} from the lattice metric.
    const MatN hinv = c->inverse();
    std::vector<MatN> gamma(2, MatN::Zero(2, 2));
    for (int m = 0; m < 2; ++m)
        for (int a = 0; a < 2; ++a)
            for (int bb = 0; bb < 2; ++bb)
                for (int l = 0; l < 2; ++l)
                    gamma[m](a, bb) += 0.5 * hinv(m, l) *
                                       (dh[a](bb, l) + dh[bb](a, l) - dh[l](a, bb));
    // R_{1212} = 1/2 (2 d1d2 h_12 - d1d1 h_22 - d2d2 h_11)
    //            + h_mn (G^m_12 G^n_12 - G^m_11 G^n_22)
    double r = 0.5 * (2.0 * ddh[2](0, 1) - ddh[0](1, 1) - ddh[1](0, 0));
    for (int m = 0; m < 2; ++m)
        for (int nn = 0; nn < 2; ++nn)
            r += (*c)(m, nn) * (gamma[m](0, 1) * gamma[nn](0, 1) -
                                gamma[m](0, 0) * gamma[nn](1, 1));
    const double det = c->determinant();
    if (det <= 0.0) return false;
    K = r / det;
    return true;
}

}  // namespace split_detail

// Extracts the zero level of b column-by-column along coordinate time,
// assembles the induced metric and all residuals, and issues the verdict.
inline SplittingReport split_metric(const ScalarField& b_in, const SplitOptions& opts = {}) {
    const Grid& g = *b_in.grid;
    const MetricChart& chart = g.chart();
    const int n = g.dim();
    SplittingReport rep;
    rep.induced_metric = MatN::Zero(n - 1, n - 1);
    rep.tolerance = opts.tolerance > 0.0
                        ? opts.tolerance
                        : std::max(20.0 * split_detail::calibration_error(g, opts.fd),
                                   opts.tolerance_floor);
    // Finite-r Busemann fields are only semiconcave: at the cut locus of the
    // line's spatial position the one-sided slopes disagree by an amount the
    // r-extrapolation does not remove.  Such ridges are isolated, so flag
    // slope disagreements that are extreme outliers against the field's own
    // median and exclude those nodes; widespread disagreement is left alone
    // (it is curvature signal, not cut locus).
    ScalarField b = b_in;
    {
        std::vector<double> dis(g.size(), 0.0);
        std::vector<double> pool;
        for (long f = 0; f < g.size(); ++f) {
            if (!b.valid(f)) continue;
            const std::vector<int> idx = g.unflat(f);
            double s = 0.0;
            bool any = false;
            for (int a = 0; a < n; ++a) {
                const long lp = hess_detail::shifted(g, idx, a, +1);
                const long lm = hess_detail::shifted(g, idx, a, -1);
                if (lp < 0 || lm < 0 || !b.valid(lp) || !b.valid(lm)) continue;
                const double dp = (b.values[lp] - b.values[f]) / g.spacing()[a];
                const double dm = (b.values[f] - b.values[lm]) / g.spacing()[a];
                s = std::max(s, std::abs(dp - dm));
                any = true;
            }
            if (!any) continue;
            dis[f] = s;
            pool.push_back(s);
        }
        if (!pool.empty()) {
            std::vector<double> sorted = pool;
            std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
            const double median = sorted[sorted.size() / 2];
            const double threshold = std::max(8.0 * median, 1e-12);
            long ridge = 0;
            for (long f = 0; f < g.size(); ++f)
                if (b.valid(f) && dis[f] > threshold) ++ridge;
            if (ridge > 0 && ridge <= static_cast<long>(0.10 * pool.size())) {
                for (long f = 0; f < g.size(); ++f)
                    if (b.valid(f) && dis[f] > threshold) b.mask[f] = 0;
                rep.note = "excluded " + std::to_string(ridge) + " cut-locus ridge nodes";
            }
        }
    }
    const HessianField hess = covariant_hessian(b, opts.fd);
    rep.hess_residual = hess.max_norm();
    rep.killing_residual = killing_check(b, opts.fd);
    // Level set r(y): for each spatial column find the zero crossing of b.
    std::vector<int> sshape(g.shape().begin() + 1, g.shape().end());
    long ncols = 1;
    for (int v : sshape) ncols *= v;
    std::vector<double> rlat(ncols, std::numeric_limits<double>::quiet_NaN());
    std::vector<uint8_t> rok(ncols, 0);
    bool touched_boundary = false;
    auto col_unflat = [&](long f) {
        std::vector<int> idx(n - 1);
        for (int a = n - 2; a >= 0; --a) {
            idx[a] = static_cast<int>(f % sshape[a]);
            f /= sshape[a];
        }
        return idx;
    };
    for (long c = 0; c < ncols; ++c) {
        const std::vector<int> sp = col_unflat(c);
        std::vector<int> idx(n);
        for (int a = 1; a < n; ++a) idx[a] = sp[a - 1];
        bool found = false;
        bool any_pair = false;
        for (int i0 = 0; i0 + 1 < g.shape()[0]; ++i0) {
            idx[0] = i0;
            const long f0 = g.flat(idx);
            idx[0] = i0 + 1;
            const long f1 = g.flat(idx);
            if (!b.valid(f0) || !b.valid(f1)) continue;
            any_pair = true;
            const double v0 = b.values[f0], v1 = b.values[f1];
            if ((v0 <= 0.0 && v1 > 0.0) || (v0 >= 0.0 && v1 < 0.0)) {
                const double frac = v1 == v0 ? 0.5 : -v0 / (v1 - v0);
                rlat[c] = g.point(g.unflat(f0))[0] + frac * g.spacing()[0];
                rok[c] = 1;
                if (i0 == 0 || i0 + 2 == g.shape()[0]) touched_boundary = true;
                found = true;
                break;
            }
        }
        // A column with no usable data (e.g. fully excluded as cut locus) is
        // simply absent; only a column with data and no crossing means the
        // level set left the chart.
        if (!found && any_pair) touched_boundary = true;
    }
    // Tangent frame e_a = d/dy^a + (dr/dy^a) d/dt at each level-set sample.
    std::vector<std::vector<MatN>> hlat;  // induced metric for the 2d Ricci pass
    if (n == 3) hlat.assign(sshape[0], std::vector<MatN>(sshape[1], MatN::Zero(2, 2)));
    MatN havg = MatN::Zero(n - 1, n - 1);
    double min_eig = std::numeric_limits<double>::infinity();
    std::vector<std::vector<uint8_t>> hok;
    if (n == 3) hok.assign(sshape[0], std::vector<uint8_t>(sshape[1], 0));
    for (long c = 0; c < ncols; ++c) {
        if (!rok[c]) continue;
        const std::vector<int> sp = col_unflat(c);
        // dr/dy^a by central differences on the spatial lattice.
        VecN drdy(n - 1);
        bool ok = true;
        for (int a = 0; a < n - 1 && ok; ++a) {
            auto wrap = [&](int v) {
                if (chart.periodic[a + 1]) return (v % sshape[a] + sshape[a]) % sshape[a];
                return v;
            };
            const int jp = wrap(sp[a] + 1), jm = wrap(sp[a] - 1);
            if (jp < 0 || jp >= sshape[a] || jm < 0 || jm >= sshape[a]) {
                ok = false;
                break;
            }
            std::vector<int> np = sp, nm = sp;
            np[a] = jp;
            nm[a] = jm;
            long cp = 0, cm = 0;
            for (int k = 0; k < n - 1; ++k) {
                cp = cp * sshape[k] + np[k];
                cm = cm * sshape[k] + nm[k];
            }
            if (!rok[cp] || !rok[cm]) {
                ok = false;
                break;
            }
            drdy[a] = (rlat[cp] - rlat[cm]) / (2.0 * g.spacing()[a + 1]);
        }
        if (!ok) continue;
        std::vector<int> idx(n, 0);
        for (int a = 1; a < n; ++a) idx[a] = sp[a - 1];
        VecN x = g.point(idx);
        x[0] = rlat[c];
        const MatN gm = chart.metric_at(x);
        // db at the crossing, interpolated between the bracketing nodes.
        std::vector<int> below = idx;
        below[0] = std::min(g.shape()[0] - 2,
                            std::max(0, static_cast<int>((rlat[c] - chart.box[0][0]) /
                                                         g.spacing()[0])));
        std::vector<int> above = below;
        above[0] += 1;
        VecN db0, db1;
        if (!hess_detail::node_gradient(g, b.values, b.mask, below, db0) ||
            !hess_detail::node_gradient(g, b.values, b.mask, above, db1))
            continue;
        const double frac = (rlat[c] - g.point(below)[0]) / g.spacing()[0];
        const VecN db = (1.0 - frac) * db0 + frac * db1;
        MatN h = MatN::Zero(n - 1, n - 1);
        for (int a = 0; a < n - 1; ++a) {
            VecN ea = VecN::Zero(n);
            ea[0] = drdy[a];
            ea[a + 1] = 1.0;
            rep.cross_term_residual = std::max(rep.cross_term_residual, std::abs(db.dot(ea)));
            for (int bb = 0; bb < n - 1; ++bb) {
                VecN eb = VecN::Zero(n);
                eb[0] = drdy[bb];
                eb[bb + 1] = 1.0;
                h(a, bb) = -ea.dot(gm * eb);  // Riemannian sign for the slice
            }
        }
        havg += h;
        const VecN eigs = sym_eigenvalues(h);
        min_eig = std::min(min_eig, eigs.minCoeff());
        ++rep.sigma_samples;
        if (n == 3) {
            hlat[sp[0]][sp[1]] = h;
            hok[sp[0]][sp[1]] = 1;
        }
    }
    if (rep.sigma_samples == 0) {
        rep.verdict = SplitVerdict::Inconclusive;
        rep.note = "no zero level set inside the chart";
        return rep;
    }
    rep.induced_metric = havg / double(rep.sigma_samples);
    rep.induced_metric_min_eig = min_eig;
    // Induced Ricci: vacuous in dimension 1; Gauss curvature in dimension 2.
    if (n == 3) {
        double kmin = std::numeric_limits<double>::infinity();
        bool any = false;
        const std::array<double, 2> dy{g.spacing()[1], g.spacing()[2]};
        const std::array<bool, 2> wrap{chart.periodic[1], chart.periodic[2]};
        for (int i = 0; i < sshape[0]; ++i) {
            for (int j = 0; j < sshape[1]; ++j) {
                if (!hok[i][j]) continue;
                bool full = true;
                for (int di = -1; di <= 1 && full; ++di)
                    for (int dj = -1; dj <= 1 && full; ++dj) {
                        int a = i + di, bb = j + dj;
                        if (wrap[0]) a = (a % sshape[0] + sshape[0]) % sshape[0];
                        if (wrap[1]) bb = (bb % sshape[1] + sshape[1]) % sshape[1];
                        if (a < 0 || a >= sshape[0] || bb < 0 || bb >= sshape[1] || !hok[a][bb])
                            full = false;
                    }
                double K;
                if (full && split_detail::gauss_curvature(hlat, i, j, dy, wrap, K)) {
                    // Ric_h(v,v) = K h(v,v); for unit v this is K itself.
                    kmin = std::min(kmin, K);
                    any = true;
                }
            }
        }
        rep.induced_ricci_min = any ? kmin : 0.0;
    }
    const bool residuals_ok = rep.hess_residual < rep.tolerance &&
                              rep.killing_residual < rep.tolerance &&
                              rep.cross_term_residual < rep.tolerance;
    if (!residuals_ok || min_eig <= 0.0) {
        rep.verdict = SplitVerdict::NoSplit;
    } else if (touched_boundary) {
        // Residuals pass but the extraction is partial: do not overclaim.
        rep.verdict = SplitVerdict::Inconclusive;
        rep.note = "level set touches the grid boundary";
    } else {
        rep.verdict = SplitVerdict::Splits;
    }
    return rep;
}

}  // namespace lorlab
