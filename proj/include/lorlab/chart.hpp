#pragma once

// Analytic model spacetimes on coordinate charts.  Axis 0 is coordinate time
// and d/dx^0 is future timelike everywhere in the box.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorlab/cone.hpp"
#include "lorlab/linalg.hpp"

namespace lorlab {

struct CurvatureRecord {
    std::vector<MatN> christoffel;  // christoffel[i](j,k) = Gamma^i_{jk}
    std::vector<double> riemann;    // lowered R_{ijkl}, row-major i,j,k,l
    MatN ricci;                     // Ric_{ij} = g^{kl} R_{ikjl}
    double scalar = 0.0;            // R = g^{ij} Ric_{ij}
    MatN einstein;                  // G = Ric - (1/2) R g
    double volume_density = 0.0;    // sqrt(|det g|)
    int n = 0;

    double riem(int i, int j, int k, int l) const {
        return riemann[((i * n + j) * n + k) * n + l];
    }
    double& riem(int i, int j, int k, int l) {
        return riemann[((i * n + j) * n + k) * n + l];
    }

    static CurvatureRecord zeros(int n) {
        CurvatureRecord r;
        r.n = n;
        r.christoffel.assign(n, MatN::Zero(n, n));
        r.riemann.assign(static_cast<size_t>(n) * n * n * n, 0.0);
        r.ricci = MatN::Zero(n, n);
        r.einstein = MatN::Zero(n, n);
        return r;
    }
};

struct MetricChart {
    int n = 0;
    std::vector<std::array<double, 2>> box;  // per-axis [min, max]
    std::vector<bool> periodic;              // per-axis
    std::function<MatN(const VecN&)> metric_at;
    std::string name;
    std::optional<std::function<CurvatureRecord(const VecN&)>> analytic_curvature;

    MetricValue metric(const VecN& x) const { return MetricValue{metric_at(x), 1.0}; }

    double extent(int axis) const { return box[axis][1] - box[axis][0]; }

    bool inside(const VecN& x, double margin = 0.0) const {
        for (int a = 0; a < n; ++a) {
            if (periodic[a]) continue;
            if (x[a] < box[a][0] + margin || x[a] > box[a][1] - margin) return false;
        }
        return true;
    }

    // Spot-check the Lorentzian signature invariant on a coarse lattice.
    void validate(int samples_per_axis = 3) const {
        std::vector<int> idx(n, 0);
        for (;;) {
            VecN x(n);
            for (int a = 0; a < n; ++a)
                x[a] = box[a][0] + extent(a) * (idx[a] + 0.5) / samples_per_axis;
            MetricValue::checked(metric_at(x));
            int a = 0;
            while (a < n && ++idx[a] == samples_per_axis) idx[a++] = 0;
            if (a == n) break;
        }
    }
};

// ---------------------------------------------------------------------------
// Model library.  Every model carries analytic curvature where closed forms
// exist; tests use those as oracles against the finite-difference path.

namespace models {

inline MetricChart minkowski(int n, std::vector<std::array<double, 2>> box = {}) {
    if (n < 2 || n > kMaxDim) throw std::invalid_argument("minkowski: n in [2,4]");
    MetricChart c;
    c.n = n;
    if (box.empty()) {
        box.assign(n, {-1.0, 1.0});
        box[0] = {0.0, 2.0};
    }
    c.box = std::move(box);
    c.periodic.assign(n, false);
    c.name = "minkowski";
    c.metric_at = [n](const VecN&) {
        MatN g = -MatN::Identity(n, n);
        g(0, 0) = 1.0;
        return g;
    };
    c.analytic_curvature = [n](const VecN&) { return CurvatureRecord::zeros(n); };
    return c;
}

// Flat product R x S^1 (circle radius rho0, coordinate theta in [0, 2pi)).
inline MetricChart product_circle(double rho0, std::array<double, 2> tbox = {-1.0, 1.0}) {
    MetricChart c;
    c.n = 2;
    c.box = {tbox, {0.0, 2.0 * M_PI}};
    c.periodic = {false, true};
    c.name = "product_circle";
    c.metric_at = [rho0](const VecN&) {
        MatN g(2, 2);
        g << 1.0, 0.0, 0.0, -rho0 * rho0;
        return g;
    };
    c.analytic_curvature = [](const VecN&) { return CurvatureRecord::zeros(2); };
    return c;
}

// Flat product R x T^2 (torus radii rho1, rho2).
inline MetricChart product_torus(double rho1, double rho2,
                                 std::array<double, 2> tbox = {-1.0, 1.0}) {
    MetricChart c;
    c.n = 3;
    c.box = {tbox, {0.0, 2.0 * M_PI}, {0.0, 2.0 * M_PI}};
    c.periodic = {false, true, true};
    c.name = "product_torus";
    c.metric_at = [rho1, rho2](const VecN&) {
        MatN g = MatN::Zero(3, 3);
        g(0, 0) = 1.0;
        g(1, 1) = -rho1 * rho1;
        g(2, 2) = -rho2 * rho2;
        return g;
    };
    c.analytic_curvature = [](const VecN&) { return CurvatureRecord::zeros(3); };
    return c;
}

// Product R x S^2 (round sphere radius rho0); chart avoids the poles.
inline MetricChart product_sphere(double rho0, std::array<double, 2> tbox = {-1.0, 1.0}) {
    MetricChart c;
    c.n = 3;
    c.box = {tbox, {0.4, M_PI - 0.4}, {0.0, 2.0 * M_PI}};
    c.periodic = {false, false, true};
    c.name = "product_sphere";
    c.metric_at = [rho0](const VecN& x) {
        MatN g = MatN::Zero(3, 3);
        const double s = std::sin(x[1]);
        g(0, 0) = 1.0;
        g(1, 1) = -rho0 * rho0;
        g(2, 2) = -rho0 * rho0 * s * s;
        return g;
    };
    c.analytic_curvature = [rho0](const VecN& x) {
        const double th = x[1], s = std::sin(th), co = std::cos(th);
        CurvatureRecord r = CurvatureRecord::zeros(3);
        r.christoffel[1](2, 2) = -s * co;  // Gamma^theta_{phi phi}
        r.christoffel[2](1, 2) = r.christoffel[2](2, 1) = co / s;
        r.riem(1, 2, 1, 2) = -rho0 * rho0 * s * s;
        r.riem(2, 1, 2, 1) = -rho0 * rho0 * s * s;
        r.riem(1, 2, 2, 1) = rho0 * rho0 * s * s;
        r.riem(2, 1, 1, 2) = rho0 * rho0 * s * s;
        r.ricci(1, 1) = 1.0;
        r.ricci(2, 2) = s * s;
        MatN g = MatN::Zero(3, 3);
        g(0, 0) = 1.0;
        g(1, 1) = -rho0 * rho0;
        g(2, 2) = -rho0 * rho0 * s * s;
        r.scalar = (g.inverse() * r.ricci).trace();
        r.einstein = r.ricci - 0.5 * r.scalar * g;
        r.volume_density = std::sqrt(std::abs(g.determinant()));
        return r;
    };
    return c;
}

enum class ScaleFactor { Matter, Exponential, Constant };

// FLRW g = dt^2 - a(t)^2 (dx^2 + ...), with k spatial dimensions.
// a in { t^(2/3), e^t, 1 }.
inline MetricChart flrw(ScaleFactor kind, int spatial_dims = 3,
                        std::array<double, 2> tbox = {0.5, 2.0}, double spatial_halfwidth = 1.0) {
    const int n = spatial_dims + 1;
    if (n < 2 || n > kMaxDim) throw std::invalid_argument("flrw: spatial_dims in [1,3]");
    auto a_of = [kind](double t, double& a, double& da, double& dda) {
        switch (kind) {
            case ScaleFactor::Matter:
                a = std::pow(t, 2.0 / 3.0);
                da = (2.0 / 3.0) * std::pow(t, -1.0 / 3.0);
                dda = -(2.0 / 9.0) * std::pow(t, -4.0 / 3.0);
                break;
            case ScaleFactor::Exponential:
                a = std::exp(t);
                da = a;
                dda = a;
                break;
            case ScaleFactor::Constant:
                a = 1.0;
                da = 0.0;
                dda = 0.0;
                break;
        }
    };
    MetricChart c;
    c.n = n;
    c.box.assign(n, {-spatial_halfwidth, spatial_halfwidth});
    c.box[0] = tbox;
    if (kind == ScaleFactor::Matter && tbox[0] <= 0.0)
        throw std::invalid_argument("flrw: matter scale factor needs t > 0");
    c.periodic.assign(n, false);
    switch (kind) {
        case ScaleFactor::Matter: c.name = "flrw_matter"; break;
        case ScaleFactor::Exponential: c.name = "flrw_exp"; break;
        case ScaleFactor::Constant: c.name = "flrw_const"; break;
    }
    c.metric_at = [n, a_of](const VecN& x) {
        double a, da, dda;
        a_of(x[0], a, da, dda);
        MatN g = -a * a * MatN::Identity(n, n);
        g(0, 0) = 1.0;
        return g;
    };
    c.analytic_curvature = [n, a_of](const VecN& x) {
        double a, da, dda;
        a_of(x[0], a, da, dda);
        const int k = n - 1;
        CurvatureRecord r = CurvatureRecord::zeros(n);
        for (int i = 1; i < n; ++i) {
            r.christoffel[0](i, i) = a * da;                     // Gamma^t_{ii}
            r.christoffel[i](0, i) = r.christoffel[i](i, 0) = da / a;
        }
        // R_{titi} = a*a'', R_{ijij} = -a^2 a'^2 (i != j spatial).
        for (int i = 1; i < n; ++i) {
            r.riem(0, i, 0, i) = r.riem(i, 0, i, 0) = a * dda;
            r.riem(0, i, i, 0) = r.riem(i, 0, 0, i) = -a * dda;
            for (int j = 1; j < n; ++j) {
                if (i == j) continue;
                r.riem(i, j, i, j) = -a * a * da * da;
                r.riem(i, j, j, i) = a * a * da * da;
            }
        }
        r.ricci(0, 0) = -k * dda / a;
        for (int i = 1; i < n; ++i) r.ricci(i, i) = a * dda + (k - 1) * da * da;
        MatN g = -a * a * MatN::Identity(n, n);
        g(0, 0) = 1.0;
        r.scalar = (g.inverse() * r.ricci).trace();
        r.einstein = r.ricci - 0.5 * r.scalar * g;
        r.volume_density = std::pow(a, k);
        return r;
    };
    return c;
}

// 1+1 bump-perturbed product: g = dt^2 - (1 + eps * exp(-x^2/width^2)) dx^2.
inline MetricChart bump_product(double eps, double width = 0.3,
                                std::array<double, 2> tbox = {-1.0, 1.0},
                                double halfwidth = 1.0) {
    MetricChart c;
    c.n = 2;
    c.box = {tbox, {-halfwidth, halfwidth}};
    c.periodic = {false, false};
    c.name = "bump_product";
    c.metric_at = [eps, width](const VecN& x) {
        MatN g(2, 2);
        const double b = 1.0 + eps * std::exp(-x[1] * x[1] / (width * width));
        g << 1.0, 0.0, 0.0, -b;
        return g;
    };
    return c;
}

// Name + parameter-map resolution used by the experiment configs.
inline MetricChart by_name(const std::string& name,
                           const std::map<std::string, std::string>& params) {
    auto getd = [&](const std::string& key, double dflt) {
        auto it = params.find(key);
        return it == params.end() ? dflt : std::stod(it->second);
    };
    auto geti = [&](const std::string& key, int dflt) {
        auto it = params.find(key);
        return it == params.end() ? dflt : std::stoi(it->second);
    };
    if (name == "minkowski") {
        const int n = geti("dim", 2);
        std::vector<std::array<double, 2>> box(n, {-getd("halfwidth", 1.0), getd("halfwidth", 1.0)});
        box[0] = {getd("tmin", 0.0), getd("tmax", 2.0)};
        return minkowski(n, std::move(box));
    }
    const std::array<double, 2> tbox{getd("tmin", -1.0), getd("tmax", 1.0)};
    if (name == "product_circle") return product_circle(getd("radius", 1.0), tbox);
    if (name == "product_torus")
        return product_torus(getd("radius1", 1.0), getd("radius2", 1.0), tbox);
    if (name == "product_sphere") return product_sphere(getd("radius", 1.0), tbox);
    if (name == "bump_product")
        return bump_product(getd("eps", 0.1), getd("width", 0.3), tbox,
                            getd("halfwidth", 1.0));
    if (name == "flrw") {
        auto it = params.find("a");
        std::string a = it == params.end() ? "t^(2/3)" : it->second;
        ScaleFactor sf;
        if (a == "t^(2/3)") sf = ScaleFactor::Matter;
        else if (a == "e^t") sf = ScaleFactor::Exponential;
        else if (a == "const") sf = ScaleFactor::Constant;
        else throw std::invalid_argument("flrw: unknown scale factor '" + a + "'");
        return flrw(sf, geti("spatial_dims", 3), {getd("tmin", 0.5), getd("tmax", 2.0)},
                    getd("halfwidth", 1.0));
    }
    throw std::invalid_argument("unknown model '" + name + "'");
}

}  // namespace models
}  // namespace lorlab
