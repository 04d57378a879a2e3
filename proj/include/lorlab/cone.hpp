#pragma once

// Pointwise algebra of the Lorentzian norm: future cone membership, causal
// classification, Lagrangian/Hamiltonian duality and the Hamiltonian Hessian.

#include <cmath>
#include <stdexcept>

#include "lorlab/extended.hpp"
#include "lorlab/linalg.hpp"

namespace lorlab {

// Metric tensor value at a point, signature (+,-,...,-).  The time axis of
// the chart (index 0) is future-directed.
struct MetricValue {
    MatN g;
    double tolerance_scale = 1.0;

    int dim() const { return static_cast<int>(g.rows()); }

    MatN inverse() const { return g.inverse(); }

    // Construction with the signature invariant enforced.  Cheap call sites
    // (chart callbacks already validated at model construction) build the
    // struct directly instead.
    static MetricValue checked(const MatN& g, double tolerance_scale = 1.0) {
        if (g.rows() != g.cols() || g.rows() < 2)
            throw std::invalid_argument("MetricValue: need square matrix, n >= 2");
        if (!g.isApprox(g.transpose(), 1e-12))
            throw std::invalid_argument("MetricValue: metric must be symmetric");
        VecN ev = sym_eigenvalues(g);
        int pos = 0, neg = 0;
        for (int i = 0; i < ev.size(); ++i) (ev[i] > 0.0 ? pos : neg)++;
        if (pos != 1 || neg != g.rows() - 1)
            throw std::invalid_argument("MetricValue: not Lorentzian signature (+,-,...,-)");
        return MetricValue{g, tolerance_scale};
    }
};

enum class CausalClass { Timelike, Lightlike, Spacelike, PastCausal, Zero };

inline const char* to_string(CausalClass c) {
    switch (c) {
        case CausalClass::Timelike: return "timelike";
        case CausalClass::Lightlike: return "lightlike";
        case CausalClass::Spacelike: return "spacelike";
        case CausalClass::PastCausal: return "past-causal";
        case CausalClass::Zero: return "zero";
    }
    return "?";
}

// Homogeneity parameter p < 1 with conjugate q = p/(p-1); 1/p + 1/q = 1.
class PExponent {
  public:
    explicit PExponent(double p) : p_(p), q_(p / (p - 1.0)) {
        if (!(p < 1.0) || p == 0.0)
            throw std::invalid_argument("PExponent: need p < 1, p != 0 (ellipticity fails at p = 1)");
    }
    static PExponent from_q(double q) {
        if (!(q < 1.0) || q == 0.0)
            throw std::invalid_argument("PExponent: need q < 1, q != 0");
        return PExponent(q / (q - 1.0));
    }
    double p() const { return p_; }
    double q() const { return q_; }

  private:
    double p_;
    double q_;
};

namespace detail {
inline void require_dim(const VecN& v, const MetricValue& g) {
    if (v.size() != g.g.rows())
        throw std::invalid_argument("dimension mismatch between vector and metric");
}
}  // namespace detail

// Scale-invariant cone decision: v is causal iff g(v,v) >= -eps*|v|_E^2,
// lightlike iff |g(v,v)| <= eps*|v|_E^2, with eps = 1e-12 * toleranceScale.
inline CausalClass classify(const VecN& v, const MetricValue& g) {
    detail::require_dim(v, g);
    const double e2 = v.squaredNorm();
    if (e2 == 0.0) return CausalClass::Zero;
    const double eps = 1e-12 * g.tolerance_scale * e2;
    const VecN gv = g.g * v;
    const double quad = v.dot(gv);
    if (quad < -eps) return CausalClass::Spacelike;
    // Causal; orientation from pairing against the chart's future axis e_0.
    const bool future = gv[0] > 0.0;
    if (!future) return CausalClass::PastCausal;
    return std::abs(quad) <= eps ? CausalClass::Lightlike : CausalClass::Timelike;
}

// Hyperbolic norm |v|_F: sqrt(g(v,v)) on the future cone, -inf elsewhere.
// Concave and 1-homogeneous where finite.
inline XReal f_norm(const VecN& v, const MetricValue& g) {
    switch (classify(v, g)) {
        case CausalClass::Timelike:
        case CausalClass::Lightlike: {
            const double quad = v.dot(g.g * v);
            return XReal(std::sqrt(std::max(quad, 0.0)));
        }
        case CausalClass::Zero:
            return XReal(0.0);
        default:
            return XReal::neg_inf();
    }
}

// Dual-cone membership and norm: w lies in F* iff the g-raised vector does
// in F.  The paper leaves the dual normalization open; this fixes it so that
// momenta produced by the velocity->momentum map below land in F*.
inline VecN raise_index(const VecN& w, const MetricValue& g) {
    detail::require_dim(w, g);
    return g.inverse() * w;
}

inline XReal fstar_norm(const VecN& w, const MetricValue& g) {
    return f_norm(raise_index(w, g), g);
}

struct ExtendedValue {
    XReal value;
    bool on_boundary = false;  // evaluated exactly on the cone boundary (one-sided limit)
};

// Lagrangian L(v) = -(1/q)|v|_F^q on F, +infinity outside.  For 0 < q < 1
// the value jumps from 0 to +infinity across the cone boundary; for q < 0 it
// diverges already at the boundary.
inline ExtendedValue lagrangian(const VecN& v, const PExponent& pq, const MetricValue& g) {
    const double q = pq.q();
    switch (classify(v, g)) {
        case CausalClass::Timelike: {
            const double nv = f_norm(v, g).value();
            return {XReal(-std::pow(nv, q) / q), false};
        }
        case CausalClass::Lightlike:
        case CausalClass::Zero:
            // |v|_F = 0: one-sided limit along the cone.
            if (q > 0.0) return {XReal(0.0), true};
            return {XReal::pos_inf(), true};
        default:
            return {XReal::pos_inf(), false};
    }
}

// Hamiltonian H(w) = -(1/p)|w|_{F*}^p on the interior of F*, +infinity
// outside; for p < 0 it diverges continuously at the boundary.
inline ExtendedValue hamiltonian(const VecN& w, const PExponent& pq, const MetricValue& g) {
    const double p = pq.p();
    switch (classify(raise_index(w, g), g)) {
        case CausalClass::Timelike: {
            const double nw = fstar_norm(w, g).value();
            return {XReal(-std::pow(nw, p) / p), false};
        }
        case CausalClass::Lightlike:
        case CausalClass::Zero:
            if (p < 0.0) return {XReal::pos_inf(), true};
            return {XReal(0.0), true};
        default:
            return {XReal::pos_inf(), false};
    }
}

namespace detail {
inline void require_strict_timelike(const VecN& v, const MetricValue& g, const char* who) {
    if (classify(v, g) != CausalClass::Timelike)
        throw std::domain_error(std::string(who) + ": vector not strictly future timelike");
}
}  // namespace detail

// Velocity -> momentum map, w_i = |v|_F^{q-2} g_{ij} v^j.  Sign convention:
// momenta of future velocities land in F* (H(dl(v)) finite); see dual-cone
// normalization note above.
inline VecN legendre_momentum(const VecN& v, const PExponent& pq, const MetricValue& g) {
    detail::require_strict_timelike(v, g, "legendre_momentum");
    const double nv = f_norm(v, g).value();
    return std::pow(nv, pq.q() - 2.0) * (g.g * v);
}

// Momentum -> velocity map, v^i = |w|_{F*}^{p-2} g^{ij} w_j.
inline VecN legendre_velocity(const VecN& w, const PExponent& pq, const MetricValue& g) {
    const VecN up = raise_index(w, g);
    detail::require_strict_timelike(up, g, "legendre_velocity");
    const double nw = fstar_norm(w, g).value();
    return std::pow(nw, pq.p() - 2.0) * up;
}

struct LegendreCheck {
    double residual;        // |DH(DL(v)) - v|_E
    bool near_cone;         // |v|_F^2 small relative to |v|_E^2: poorly conditioned
};

// Round-trip DH(DL(v)) = v; residual vanishes in exact arithmetic for
// conjugate exponents.
inline LegendreCheck legendre_check(const VecN& v, const PExponent& pq, const MetricValue& g) {
    detail::require_strict_timelike(v, g, "legendre_check");
    const VecN w = legendre_momentum(v, pq, g);
    const VecN back = legendre_velocity(w, pq, g);
    const double quad = v.dot(g.g * v);
    return {(back - v).norm(), quad < 1e-2 * v.squaredNorm()};
}

struct HamiltonianHessian {
    MatN matrix;       // H^{ij}, contravariant
    VecN eigenvalues;  // ascending; all > 0 for p < 1 on the interior of F*
};

// H^{ij} = |w|^{p-2} [ (2-p) (g^{ik} w_k)(g^{jl} w_l)/|w|^2 - g^{ij} ].
inline HamiltonianHessian hamiltonian_hessian(const VecN& w, const PExponent& pq,
                                              const MetricValue& g) {
    const VecN up = raise_index(w, g);
    detail::require_strict_timelike(up, g, "hamiltonian_hessian");
    const double nw = fstar_norm(w, g).value();
    const double p = pq.p();
    MatN h = std::pow(nw, p - 2.0) *
             ((2.0 - p) / (nw * nw) * (up * up.transpose()) - MatN(g.inverse()));
    return {h, sym_eigenvalues(h)};
}

}  // namespace lorlab
