#pragma once

// Time-separation on a causal grid graph: longest-path dynamic programming in
// time-slice order plus continuous variational refinement of the q-action.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lorlab/cone.hpp"
#include "lorlab/grid.hpp"

namespace lorlab {

// Implicit DAG on the grid: u -> v iff v - u lies within the stencil, moves
// forward in time, and is future-causal for the metric at the segment
// midpoint.  Edge weight is the proper time |dx|_F of the chord.
class CausalGraph {
  public:
    CausalGraph(const Grid& grid, int stencil_radius) : grid_(&grid), radius_(stencil_radius) {
        if (stencil_radius < 1) throw std::invalid_argument("CausalGraph: stencilRadius >= 1");
        for (int a = 0; a < grid.dim(); ++a)
            if (stencil_radius >= grid.shape()[a])
                throw std::invalid_argument("CausalGraph: stencil exceeds grid shape");
    }

    const Grid& grid() const { return *grid_; }
    int stencil_radius() const { return radius_; }

    // fn(v_flat, weight); enumeration order is deterministic.
    template <typename F>
    void for_each_successor(long u, F&& fn) const {
        const Grid& g = *grid_;
        const int n = g.dim();
        std::vector<int> ui = g.unflat(u);
        std::vector<int> vi(n);
        const VecN xu = g.point(ui);
        std::vector<int> off(n - 1, -radius_);
        for (int dt = 1; dt <= radius_; ++dt) {
            vi[0] = ui[0] + dt;
            if (vi[0] >= g.shape()[0]) break;
            // Odometer over spatial offsets in [-radius, radius]^(n-1).
            std::fill(off.begin(), off.end(), -radius_);
            for (;;) {
                bool in_range = true;
                for (int a = 1; a < n; ++a) {
                    int j = ui[a] + off[a - 1];
                    if (g.chart().periodic[a]) {
                        j %= g.shape()[a];
                        if (j < 0) j += g.shape()[a];
                    } else if (j < 0 || j >= g.shape()[a]) {
                        in_range = false;
                    }
                    vi[a] = j;
                }
                if (in_range) {
                    VecN d(n);
                    d[0] = dt * g.spacing()[0];
                    for (int a = 1; a < n; ++a) d[a] = off[a - 1] * g.spacing()[a];
                    const VecN mid = xu + 0.5 * d;
                    const MetricValue gm{g.chart().metric_at(mid), 1.0};
                    const CausalClass cc = classify(d, gm);
                    if (cc == CausalClass::Timelike || cc == CausalClass::Lightlike) {
                        const double w = std::sqrt(std::max(d.dot(gm.g * d), 0.0));
                        fn(g.flat(vi), w);
                    }
                }
                int a = 0;
                while (a < n - 1 && ++off[a] > radius_) off[a++] = -radius_;
                if (a == n - 1) break;
            }
        }
    }

  private:
    const Grid* grid_;
    int radius_;
};

inline CausalGraph build_causal_graph(const Grid& grid, int stencil_radius = 3) {
    return CausalGraph(grid, stencil_radius);
}

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct DpField {
    std::vector<double> dist;  // -inf where unreachable
    std::vector<long> link;    // backpointer (dp_from) or forward pointer (dp_to)
};

// Longest-path values from a single source to every node.  Flat index order
// is time-major, so an ascending sweep respects the DAG order.  Strict
// improvement keeps the lexicographically smallest predecessor.
inline DpField dp_from(const CausalGraph& cg, long source) {
    const long size = cg.grid().size();
    DpField f{std::vector<double>(size, kNegInf), std::vector<long>(size, -1)};
    f.dist[source] = 0.0;
    for (long u = source; u < size; ++u) {
        if (f.dist[u] == kNegInf) continue;
        cg.for_each_successor(u, [&](long v, double w) {
            if (f.dist[u] + w > f.dist[v]) {
                f.dist[v] = f.dist[u] + w;
                f.link[v] = u;
            }
        });
    }
    return f;
}

// Longest-path values from every node to a single target.
inline DpField dp_to(const CausalGraph& cg, long target) {
    const long size = cg.grid().size();
    DpField f{std::vector<double>(size, kNegInf), std::vector<long>(size, -1)};
    f.dist[target] = 0.0;
    for (long u = target; u >= 0; --u) {
        double best = u == target ? 0.0 : kNegInf;
        long bestlink = -1;
        cg.for_each_successor(u, [&](long v, double w) {
            if (f.dist[v] != kNegInf && w + f.dist[v] > best) {
                best = w + f.dist[v];
                bestlink = v;
            }
        });
        if (best > f.dist[u]) {
            f.dist[u] = best;
            f.link[u] = bestlink;
        }
    }
    return f;
}

// Longest path to a set of targets (all initialized to zero), e.g. a slice.
inline DpField dp_to_set(const CausalGraph& cg, const std::vector<long>& targets) {
    const long size = cg.grid().size();
    DpField f{std::vector<double>(size, kNegInf), std::vector<long>(size, -1)};
    for (long t : targets) f.dist[t] = 0.0;
    for (long u = size - 1; u >= 0; --u) {
        double best = f.dist[u];
        long bestlink = -1;
        cg.for_each_successor(u, [&](long v, double w) {
            if (f.dist[v] != kNegInf && w + f.dist[v] > best) {
                best = w + f.dist[v];
                bestlink = v;
            }
        });
        if (bestlink >= 0) {
            f.dist[u] = best;
            f.link[u] = bestlink;
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// Continuous refinement

struct RefineOptions {
    int max_iter = 200;
    double step_fraction = 0.1;    // of the smallest grid spacing
    double rel_tolerance = 1e-10;  // terminate on relative improvement below this
    int resample_segments = 0;     // 0 = keep path vertices
};

namespace refine_detail {

// Discrete q-action of a polyline with uniform parameter: S = sum |d_j|^q dl^{1-q},
// l_q = S^(1/q).  At the maximizer the segments equalize and l_q equals the
// plain proper-time sum.
struct Action {
    const MetricChart* chart;
    double q;
    VecN fd_h;

    double seg2(const VecN& a, const VecN& b) const {
        const VecN d = b - a;
        const VecN mid = 0.5 * (a + b);
        return d.dot(chart->metric_at(mid) * d);
    }

    bool causal(const std::vector<VecN>& p) const {
        for (size_t j = 1; j < p.size(); ++j) {
            const VecN d = p[j] - p[j - 1];
            if (d[0] <= 0.0) return false;
            if (seg2(p[j - 1], p[j]) < 0.0) return false;
        }
        return true;
    }

    // Proper-time sum (the q-independent objective used for geometric polish).
    double total(const std::vector<VecN>& p) const {
        double s = 0.0;
        for (size_t j = 1; j < p.size(); ++j) s += std::sqrt(std::max(seg2(p[j - 1], p[j]), 0.0));
        return s;
    }

    double ell_q(const std::vector<VecN>& p) const {
        const double m = static_cast<double>(p.size() - 1);
        const double dl = 1.0 / m;
        double s = 0.0;
        for (size_t j = 1; j < p.size(); ++j) {
            const double a = std::sqrt(std::max(seg2(p[j - 1], p[j]), 1e-300));
            s += std::pow(a, q) * std::pow(dl, 1.0 - q);
        }
        return std::pow(s, 1.0 / q);
    }

    // d(seg2)/d(vertex) for the two vertices of segment (a,b); includes the
    // metric's midpoint dependence via FD.
    void seg2_grad(const VecN& a, const VecN& b, VecN& ga, VecN& gb) const {
        const VecN d = b - a;
        const VecN mid = 0.5 * (a + b);
        const MatN g = chart->metric_at(mid);
        const VecN gd = g * d;
        ga = -2.0 * gd;
        gb = 2.0 * gd;
        for (int c = 0; c < chart->n; ++c) {
            VecN mp = mid, mm = mid;
            mp[c] += fd_h[c];
            mm[c] -= fd_h[c];
            const double dgq = d.dot((chart->metric_at(mp) - chart->metric_at(mm)) * d) /
                               (2.0 * fd_h[c]);
            ga[c] += 0.5 * dgq;
            gb[c] += 0.5 * dgq;
        }
    }
};

// Projected gradient ascent with backtracking; endpoints pinned.  objective:
// 0 = proper-time sum, 1 = q-action.
inline double ascend(const Action& act, std::vector<VecN>& p, int objective,
                     const RefineOptions& opts, double max_step) {
    const int m = static_cast<int>(p.size()) - 1;
    if (m < 2) return objective ? act.ell_q(p) : act.total(p);
    auto value = [&](const std::vector<VecN>& pts) {
        return objective ? act.ell_q(pts) : act.total(pts);
    };
    double cur = value(p);
    std::vector<VecN> grad(p.size(), VecN::Zero(p[0].size()));
    for (int it = 0; it < opts.max_iter; ++it) {
        for (auto& gv : grad) gv.setZero();
        const double dl = 1.0 / m;
        double S = 0.0;
        for (int j = 1; j <= m; ++j) {
            const double s2 = std::max(act.seg2(p[j - 1], p[j]), 1e-300);
            const double a = std::sqrt(s2);
            VecN ga, gb;
            act.seg2_grad(p[j - 1], p[j], ga, gb);
            double coef;
            if (objective == 0) {
                coef = 0.5 / a;  // d|d|/d(seg2)
            } else {
                S += std::pow(a, act.q) * std::pow(dl, 1.0 - act.q);
                coef = 0.5 * act.q * std::pow(a, act.q - 2.0) * std::pow(dl, 1.0 - act.q);
            }
            if (j - 1 > 0) grad[j - 1] += coef * ga;
            if (j < m) grad[j] += coef * gb;
        }
        if (objective == 1) {
            const double outer = std::pow(S, 1.0 / act.q - 1.0) / act.q;
            for (auto& gv : grad) gv *= outer;
        }
        double gmax = 0.0;
        for (int j = 1; j < m; ++j) gmax = std::max(gmax, grad[j].cwiseAbs().maxCoeff());
        if (gmax == 0.0) break;
        double step = max_step / gmax;
        bool improved = false;
        for (int bt = 0; bt < 40; ++bt) {
            std::vector<VecN> trial = p;
            for (int j = 1; j < m; ++j) trial[j] += step * grad[j];
            if (act.causal(trial)) {
                const double v = value(trial);
                if (v > cur) {
                    const double rel = (v - cur) / std::max(std::abs(v), 1e-300);
                    p = std::move(trial);
                    const bool done = rel < opts.rel_tolerance;
                    cur = v;
                    if (done) return cur;
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!improved) break;
    }
    return cur;
}

// Resample a polyline to nseg segments of equal Euclidean length, keeping
// endpoints; avoids degenerate null segments in the initial DP path.
inline std::vector<VecN> resample(const std::vector<VecN>& p, int nseg) {
    std::vector<double> cum(p.size(), 0.0);
    for (size_t j = 1; j < p.size(); ++j) cum[j] = cum[j - 1] + (p[j] - p[j - 1]).norm();
    const double L = cum.back();
    std::vector<VecN> out;
    out.reserve(nseg + 1);
    out.push_back(p.front());
    size_t k = 1;
    for (int i = 1; i < nseg; ++i) {
        const double target = L * i / nseg;
        while (k < p.size() - 1 && cum[k] < target) ++k;
        const double seg = cum[k] - cum[k - 1];
        const double t = seg > 0.0 ? (target - cum[k - 1]) / seg : 0.0;
        out.push_back(p[k - 1] + t * (p[k] - p[k - 1]));
    }
    out.push_back(p.back());
    return out;
}

}  // namespace refine_detail

struct PathResult {
    XReal value;              // DP longest-path value
    std::vector<long> path;   // node sequence (flat indices)
    double refined = 0.0;     // after continuous refinement; >= value - tol
    double q = 0.5;
};

// Unwrap the node path into continuous chart coordinates (periodic axes
// accumulate displacements), with optional exact endpoint overrides.
inline std::vector<VecN> path_points(const Grid& grid, const std::vector<long>& path,
                                     const VecN* pin_start = nullptr,
                                     const VecN* pin_end = nullptr) {
    std::vector<VecN> pts;
    pts.reserve(path.size());
    VecN cur = grid.point(path.front());
    pts.push_back(cur);
    for (size_t i = 1; i < path.size(); ++i) {
        cur = cur + grid.displacement(grid.unflat(path[i - 1]), grid.unflat(path[i]));
        pts.push_back(cur);
    }
    // Pins are given in wrapped chart coordinates near the respective node;
    // apply them as offsets so the unwrapped polyline stays consistent.
    if (pin_start) pts.front() += *pin_start - grid.point(path.front());
    if (pin_end) pts.back() += *pin_end - grid.point(path.back());
    return pts;
}

// Refine a polyline: a geometric polish pass on the proper-time sum, then
// ascent on the q-action itself.  Returns the refined l_q.
inline double refine_polyline(const MetricChart& chart, std::vector<VecN>& pts, double q,
                              const RefineOptions& opts, double min_spacing) {
    if (pts.size() < 3) {
        refine_detail::Action act{&chart, q, VecN::Constant(chart.n, 1e-5)};
        return act.total(pts);
    }
    if (opts.resample_segments > 0)
        pts = refine_detail::resample(pts, opts.resample_segments);
    VecN fdh(chart.n);
    for (int a = 0; a < chart.n; ++a) fdh[a] = 1e-4 * chart.extent(a);
    refine_detail::Action act{&chart, q, fdh};
    const double max_step = opts.step_fraction * min_spacing;
    // Candidate: the straight coordinate chord, resampled to the same segment
    // count.  On flat charts this is the maximizer itself, so the refined
    // value is exact there no matter how the ascent converges.
    double chord_val = kNegInf;
    {
        std::vector<VecN> chord =
            refine_detail::resample({pts.front(), pts.back()},
                                    static_cast<int>(pts.size()) - 1);
        if (act.causal(chord)) chord_val = act.total(chord);
    }
    RefineOptions half = opts;
    half.max_iter = opts.max_iter / 2;
    refine_detail::ascend(act, pts, 0, half, max_step);
    if (!act.causal(pts)) return std::max(act.total(pts), chord_val);
    // Strictly timelike segments are needed for the q-power; fall back to the
    // proper-time sum if the polished path still hugs the cone.
    bool strict = true;
    for (size_t j = 1; j < pts.size(); ++j)
        if (act.seg2(pts[j - 1], pts[j]) <= 0.0) strict = false;
    const double refined =
        strict ? refine_detail::ascend(act, pts, 1, half, max_step) : act.total(pts);
    return std::max(refined, chord_val);
}

// Discrete time-separation between grid nodes: DP sweep plus refinement.
inline PathResult time_separation(const CausalGraph& cg, long x, long y, double q,
                                  const RefineOptions& opts = {}) {
    if (x < 0 || y < 0 || x >= cg.grid().size() || y >= cg.grid().size())
        throw std::invalid_argument("time_separation: node outside grid");
    PExponent::from_q(q);  // validates the exponent range
    PathResult r;
    r.q = q;
    if (x == y) {
        r.value = XReal(0.0);
        r.refined = 0.0;
        r.path = {x};
        return r;
    }
    const DpField f = dp_from(cg, x);
    if (f.dist[y] == kNegInf) {
        r.value = XReal::neg_inf();
        r.refined = kNegInf;
        return r;
    }
    for (long v = y; v != -1; v = f.link[v]) r.path.push_back(v);
    std::reverse(r.path.begin(), r.path.end());
    r.value = XReal(f.dist[y]);
    std::vector<VecN> pts = path_points(cg.grid(), r.path);
    const double min_sp = *std::min_element(cg.grid().spacing().begin(), cg.grid().spacing().end());
    r.refined = std::max(f.dist[y], refine_polyline(cg.grid().chart(), pts, q, opts, min_sp));
    return r;
}

// Max pairwise deviation of the refined value across exponents.
inline double q_independence_check(const CausalGraph& cg, long x, long y,
                                   const std::vector<double>& qs,
                                   const RefineOptions& opts = {}) {
    std::vector<double> vals;
    bool any_inf = false, any_fin = false;
    for (double q : qs) {
        PathResult r = time_separation(cg, x, y, q, opts);
        if (r.value.is_neg_inf()) any_inf = true;
        else {
            any_fin = true;
            vals.push_back(r.refined);
        }
    }
    if (any_inf && any_fin) return std::numeric_limits<double>::infinity();
    if (vals.empty()) return 0.0;  // all -inf: deviation zero
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    return *hi - *lo;
}

}  // namespace lorlab
