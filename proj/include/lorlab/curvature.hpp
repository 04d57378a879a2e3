#pragma once

// Finite-difference curvature of a metric chart, geodesic integration, energy
// condition sampling, slice mean curvature, and sectional curvature extracted
// from the time-separation Taylor expansion.

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "lorlab/chart.hpp"
#include "lorlab/cone.hpp"
#include "lorlab/linalg.hpp"

namespace lorlab {

struct FdOptions {
    double step_fraction = 1e-3;  // FD step as a fraction of the box extent per axis
    bool richardson = false;      // one Richardson extrapolation level
};

namespace detail {

inline VecN fd_steps(const MetricChart& chart, double step_fraction) {
    VecN h(chart.n);
    for (int a = 0; a < chart.n; ++a) h[a] = step_fraction * chart.extent(a);
    return h;
}

// dg[c] = d g_ij / d x^c by central differences.
inline std::vector<MatN> metric_derivatives(const MetricChart& chart, const VecN& x,
                                            const VecN& h) {
    std::vector<MatN> dg(chart.n);
    for (int c = 0; c < chart.n; ++c) {
        VecN xp = x, xm = x;
        xp[c] += h[c];
        xm[c] -= h[c];
        dg[c] = (chart.metric_at(xp) - chart.metric_at(xm)) / (2.0 * h[c]);
    }
    return dg;
}

inline std::vector<MatN> christoffels_from(const MatN& ginv, const std::vector<MatN>& dg) {
    const int n = static_cast<int>(ginv.rows());
    std::vector<MatN> gamma(n, MatN::Zero(n, n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double s = 0.0;
                for (int l = 0; l < n; ++l)
                    s += ginv(i, l) * (dg[j](l, k) + dg[k](j, l) - dg[l](j, k));
                gamma[i](j, k) = 0.5 * s;
            }
    return gamma;
}

}  // namespace detail

// Christoffel symbols at x by central differences of the metric.
inline std::vector<MatN> christoffels(const MetricChart& chart, const VecN& x,
                                      double step_fraction = 1e-3) {
    const VecN h = detail::fd_steps(chart, step_fraction);
    const MatN ginv = chart.metric_at(x).inverse();
    return detail::christoffels_from(ginv, detail::metric_derivatives(chart, x, h));
}

namespace detail {

inline CurvatureRecord curvature_pack_once(const MetricChart& chart, const VecN& x,
                                           double step_fraction) {
    const int n = chart.n;
    const VecN h = fd_steps(chart, step_fraction);
    const MatN g = chart.metric_at(x);
    const MatN ginv = g.inverse();
    CurvatureRecord r = CurvatureRecord::zeros(n);
    r.christoffel = christoffels_from(ginv, metric_derivatives(chart, x, h));
    // dGamma[c][i](j,k) = d_c Gamma^i_{jk}, by FD of Christoffels.
    std::vector<std::vector<MatN>> dgamma(n);
    for (int c = 0; c < n; ++c) {
        VecN xp = x, xm = x;
        xp[c] += h[c];
        xm[c] -= h[c];
        auto gp = christoffels(chart, xp, step_fraction);
        auto gm = christoffels(chart, xm, step_fraction);
        dgamma[c].resize(n);
        for (int i = 0; i < n; ++i) dgamma[c][i] = (gp[i] - gm[i]) / (2.0 * h[c]);
    }
    // R^i_{jkl} = d_k G^i_{lj} - d_l G^i_{kj} + G^i_{km} G^m_{lj} - G^i_{lm} G^m_{kj}
    auto rup = [&](int i, int j, int k, int l) {
        double v = dgamma[k][i](l, j) - dgamma[l][i](k, j);
        for (int m = 0; m < n; ++m)
            v += r.christoffel[i](k, m) * r.christoffel[m](l, j) -
                 r.christoffel[i](l, m) * r.christoffel[m](k, j);
        return v;
    };
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                double up[kMaxDim];
                for (int i = 0; i < n; ++i) up[i] = rup(i, j, k, l);
                for (int i = 0; i < n; ++i) {
                    double v = 0.0;
                    for (int m = 0; m < n; ++m) v += g(i, m) * up[m];
                    r.riem(i, j, k, l) = v;
                }
            }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double v = 0.0;
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) v += ginv(k, l) * r.riem(i, k, j, l);
            r.ricci(i, j) = v;
        }
    r.scalar = (ginv * r.ricci).trace();
    r.einstein = r.ricci - 0.5 * r.scalar * g;
    r.volume_density = std::sqrt(std::abs(g.determinant()));
    return r;
}

}  // namespace detail

// Full curvature record at x.  All tensors come from central differences of
// the chart's metric callback; analytic curvature, when a model carries it,
// is reserved for test oracles.
inline CurvatureRecord curvature_pack(const MetricChart& chart, const VecN& x,
                                      const FdOptions& opts = {}) {
    const VecN h = detail::fd_steps(chart, opts.step_fraction);
    for (int a = 0; a < chart.n; ++a) {
        if (chart.periodic[a]) continue;
        if (x[a] < chart.box[a][0] + 2.0 * h[a] || x[a] > chart.box[a][1] - 2.0 * h[a])
            throw std::domain_error("curvature_pack: point too close to box boundary");
    }
    if (!opts.richardson) return detail::curvature_pack_once(chart, x, opts.step_fraction);
    CurvatureRecord c1 = detail::curvature_pack_once(chart, x, opts.step_fraction);
    CurvatureRecord c2 = detail::curvature_pack_once(chart, x, 0.5 * opts.step_fraction);
    CurvatureRecord r = c2;
    auto comb = [](double fine, double coarse) { return (4.0 * fine - coarse) / 3.0; };
    for (int i = 0; i < chart.n; ++i)
        r.christoffel[i] = (4.0 * c2.christoffel[i] - c1.christoffel[i]) / 3.0;
    for (size_t i = 0; i < r.riemann.size(); ++i) r.riemann[i] = comb(c2.riemann[i], c1.riemann[i]);
    r.ricci = (4.0 * c2.ricci - c1.ricci) / 3.0;
    r.scalar = comb(c2.scalar, c1.scalar);
    r.einstein = (4.0 * c2.einstein - c1.einstein) / 3.0;
    return r;
}

// ---------------------------------------------------------------------------
// Geodesics

struct GeodesicState {
    VecN position;
    VecN velocity;
};

// RK4 integration of x'' = -Gamma(x)(x', x') over affine parameter [0, T].
inline GeodesicState shoot_geodesic(const MetricChart& chart, const VecN& x0, const VecN& v0,
                                    double T, int steps = 64, double fd_step = 1e-3) {
    const int n = chart.n;
    auto accel = [&](const VecN& x, const VecN& v) {
        auto gamma = christoffels(chart, x, fd_step);
        VecN a(n);
        for (int i = 0; i < n; ++i) a[i] = -v.dot(gamma[i] * v);
        return a;
    };
    VecN x = x0, v = v0;
    const double dt = T / steps;
    for (int s = 0; s < steps; ++s) {
        VecN k1x = v, k1v = accel(x, v);
        VecN k2x = v + 0.5 * dt * k1v, k2v = accel(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v);
        VecN k3x = v + 0.5 * dt * k2v, k3v = accel(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v);
        VecN k4x = v + dt * k3v, k4v = accel(x + dt * k3x, v + dt * k3v);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    return {x, v};
}

// Two-point problem: initial velocity v0 with exp_A(v0) = B, by damped Newton
// with an FD Jacobian.  Intended for nearby points (no conjugate points).
inline VecN connect_geodesic(const MetricChart& chart, const VecN& a, const VecN& b,
                             int steps = 64, int max_iter = 40) {
    const int n = chart.n;
    VecN v = b - a;
    auto endpoint = [&](const VecN& vel) { return shoot_geodesic(chart, a, vel, 1.0, steps).position; };
    for (int it = 0; it < max_iter; ++it) {
        VecN f = endpoint(v) - b;
        if (f.norm() < 1e-11 * (1.0 + b.norm())) return v;
        MatN jac(n, n);
        const double dv = 1e-6 * (1.0 + v.norm());
        for (int c = 0; c < n; ++c) {
            VecN vp = v;
            vp[c] += dv;
            jac.col(c) = (endpoint(vp) - endpoint(v)) / dv;
        }
        VecN delta = jac.fullPivLu().solve(f);
        double damp = 1.0;
        const double f0 = f.norm();
        for (int k = 0; k < 8; ++k) {
            VecN trial = v - damp * delta;
            if ((endpoint(trial) - b).norm() < f0) {
                v = trial;
                break;
            }
            damp *= 0.5;
            if (k == 7) v = v - damp * delta;
        }
    }
    return v;
}

// Proper time between nearby points via the connecting geodesic; -inf when
// the connecting velocity is not future causal.
inline XReal geodesic_time_separation(const MetricChart& chart, const VecN& a, const VecN& b,
                                      int steps = 64) {
    const VecN v = connect_geodesic(chart, a, b, steps);
    return f_norm(v, chart.metric(a));
}

// ---------------------------------------------------------------------------
// Energy conditions

enum class EnergyCondition { WEC, SEC, NEC };

inline const char* to_string(EnergyCondition c) {
    switch (c) {
        case EnergyCondition::WEC: return "WEC";
        case EnergyCondition::SEC: return "SEC";
        case EnergyCondition::NEC: return "NEC";
    }
    return "?";
}

struct EnergyViolation {
    VecN point;
    VecN vector;
    double value;
};

struct EnergyConditionReport {
    EnergyCondition condition;
    int sample_points = 0;
    std::vector<EnergyViolation> violations;
    bool pass() const { return violations.empty(); }
};

// Samples points in the box and future (resp. lightlike) vectors built in a
// frame diagonalizing g; evaluates Ric(v,v) for SEC/NEC and T(v,v) = G/8pi
// for WEC.  Deterministic given the seed.
inline EnergyConditionReport energy_condition_check(const MetricChart& chart, EnergyCondition cond,
                                                    int sample_count, uint64_t seed,
                                                    double tolerance = 1e-6) {
    if (sample_count < 1) throw std::invalid_argument("energy_condition_check: sampleCount >= 1");
    const int n = chart.n;
    EnergyConditionReport rep;
    rep.condition = cond;
    rep.sample_points = sample_count;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double margin_frac = 0.05;
    for (int s = 0; s < sample_count; ++s) {
        VecN x(n);
        for (int a = 0; a < n; ++a) {
            const double m = chart.periodic[a] ? 0.0 : margin_frac * chart.extent(a);
            x[a] = chart.box[a][0] + m + (chart.extent(a) - 2.0 * m) * uni(rng);
        }
        const MatN g = chart.metric_at(x);
        Eigen::SelfAdjointEigenSolver<MatN> es(g);
        // Orthonormal frame: columns scaled so g(E_i,E_j) = diag(+1,-1,..).
        // Eigenvalues ascend, so the timelike direction is the last column.
        MatN frame(n, n);
        frame.col(0) = es.eigenvectors().col(n - 1) / std::sqrt(es.eigenvalues()[n - 1]);
        for (int i = 0; i < n - 1; ++i)
            frame.col(i + 1) = es.eigenvectors().col(i) / std::sqrt(-es.eigenvalues()[i]);
        if ((g * frame.col(0))(0) < 0.0) frame.col(0) *= -1.0;  // future orientation
        VecN dir(n);
        dir[0] = 0.0;
        double norm2 = 0.0;
        for (int i = 1; i < n; ++i) {
            dir[i] = 2.0 * uni(rng) - 1.0;
            norm2 += dir[i] * dir[i];
        }
        if (norm2 == 0.0) {
            dir[1] = 1.0;
            norm2 = 1.0;
        }
        dir /= std::sqrt(norm2);
        const double xi = cond == EnergyCondition::NEC ? 1.0 : uni(rng) * 0.95;
        VecN v = frame.col(0) + xi * (frame * dir);
        const CurvatureRecord cr = curvature_pack(chart, x);
        double val;
        if (cond == EnergyCondition::WEC)
            val = v.dot((cr.einstein / (8.0 * M_PI)) * v);
        else
            val = v.dot(cr.ricci * v);
        if (val < -tolerance) rep.violations.push_back({x, v, val});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Slice mean curvature

// Trace of the second fundamental form of {x^0 = t0} with respect to the
// future unit normal; positive for an expanding FLRW slice.
inline double slice_mean_curvature(const MetricChart& chart, double t0, const VecN& spatial,
                                   double fd_step = 1e-3) {
    const int n = chart.n;
    auto normal_at = [&](const VecN& x) {
        const MatN ginv = chart.metric_at(x).inverse();
        VecN nu = ginv.col(0);  // raise dt
        const double q = nu.dot(chart.metric_at(x) * nu);
        if (q <= 0.0) throw std::runtime_error("slice_mean_curvature: slice normal not timelike");
        nu /= std::sqrt(q);
        if (nu[0] < 0.0) nu *= -1.0;
        return nu;
    };
    VecN x(n);
    x[0] = t0;
    for (int a = 1; a < n; ++a) x[a] = spatial[a - 1];
    const MatN g = chart.metric_at(x);
    const VecN nu = normal_at(x);
    auto gamma = christoffels(chart, x, fd_step);
    // Tangent frame: spatial coordinate vectors projected off the normal.
    MatN tang(n, n - 1);
    for (int a = 1; a < n; ++a) {
        VecN e = VecN::Zero(n);
        e[a] = 1.0;
        e -= e.dot(g * nu) * nu;
        tang.col(a - 1) = e;
    }
    MatN h(n - 1, n - 1);
    for (int a = 0; a < n - 1; ++a)
        for (int b = 0; b < n - 1; ++b) h(a, b) = -tang.col(a).dot(g * tang.col(b));
    const MatN hinv = h.inverse();
    // K_ab = g(nabla_{e_a} nu, e_b); spatial derivative of the normal field by FD.
    VecN steps = detail::fd_steps(chart, fd_step);
    double trace = 0.0;
    for (int a = 0; a < n - 1; ++a) {
        VecN xp = x, xm = x;
        xp[a + 1] += steps[a + 1];
        xm[a + 1] -= steps[a + 1];
        VecN dnu = (normal_at(xp) - normal_at(xm)) / (2.0 * steps[a + 1]);
        VecN cov = dnu;
        for (int i = 0; i < n; ++i) cov[i] += tang.col(a).dot(gamma[i] * nu);
        for (int b = 0; b < n - 1; ++b) trace += -hinv(a, b) * cov.dot(g * tang.col(b));
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Sectional curvature from the time-separation expansion

struct SectionalEstimate {
    double sec = 0.0;       // fitted coefficient, matches R(u,v,u,v)
    double fit_residual = 0.0;
};

// Fits Sec from l(sigma_s, tau_t)^2 = |t v - s u|_F^2 - (Sec/6) s^2 t^2 + ...
// over a ladder of scales, with s = ratio * t enforcing t > s.  Note the
// quadratic form Sec in this expansion equals twice the contraction
// R_{ijkl} u^i v^j u^k v^l of the lowered Riemann tensor in the conventions
// of CurvatureRecord (verified numerically on curved models; the same factor
// appears in the classical Riemannian expansion).
inline SectionalEstimate sec_from_timesep(
    const MetricChart& chart, const VecN& x, const VecN& u, const VecN& v,
    const std::vector<double>& scales,
    const std::function<XReal(const VecN&, const VecN&)>& ell_provider, double ratio = 0.5) {
    const MetricValue g = chart.metric(x);
    if (classify(u, g) != CausalClass::Timelike || classify(v, g) != CausalClass::Timelike)
        throw std::domain_error("sec_from_timesep: u, v must be future timelike");
    if (classify(VecN(v - ratio * u), g) != CausalClass::Timelike)
        throw std::domain_error("sec_from_timesep: chord direction v - ratio*u must be timelike");
    std::vector<double> hs, ys;
    for (double t : scales) {
        const double s = ratio * t;
        const GeodesicState sig = shoot_geodesic(chart, x, u, s);
        const GeodesicState tau = shoot_geodesic(chart, x, v, t);
        const XReal ell = ell_provider(sig.position, tau.position);
        if (!ell.finite()) throw std::domain_error("sec_from_timesep: points not causally related");
        const XReal chord = f_norm(VecN(t * v - s * u), g);
        if (!chord.finite())
            throw std::domain_error("sec_from_timesep: chord t*v - s*u not causal");
        const double y =
            6.0 * (chord.value() * chord.value() - ell.value() * ell.value()) / (s * s * t * t);
        hs.push_back(t);
        ys.push_back(y);
    }
    // Least-squares fit y = sec + c * h; the remainder is O(h) relative.
    const int m = static_cast<int>(hs.size());
    if (m == 1) return {ys[0], 0.0};
    Eigen::MatrixXd A(m, 2);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = hs[i];
        b[i] = ys[i];
    }
    Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
    return {coef[0], (A * coef - b).norm() / std::sqrt(double(m))};
}

}  // namespace lorlab
