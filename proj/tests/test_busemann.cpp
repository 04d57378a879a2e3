// Busemann fields along a comoving line: closed-form values, masks, the
// r-ladder limit, ordering/steepness diagnostics, eikonal and regularity.

#include <catch2/catch_amalgamated.hpp>

#include "lorlab/busemann.hpp"
#include "lorlab/chart.hpp"

using namespace lorlab;

namespace {

VecN vec2(double a, double b) {
    VecN v(2);
    v << a, b;
    return v;
}

// Closed form on Minkowski 1+1 for the line gamma(r) = (r, 0):
// b_r^+(t, x) = r - sqrt((r - t)^2 - x^2).
double br_plus_exact(double r, double t, double x) {
    return r - std::sqrt((r - t) * (r - t) - x * x);
}

}  // namespace

TEST_CASE("comoving_line parameterization and range") {
    const MetricChart c = models::minkowski(2, {{-3.0, 3.0}, {-1.0, 1.0}});
    VecN sp(1);
    sp << 0.25;
    const Line l = comoving_line(c, sp, 0.0);
    CHECK(l.gamma(1.5)[0] == 1.5);
    CHECK(l.gamma(1.5)[1] == 0.25);
    CHECK(l.r_min == -3.0);
    CHECK(l.r_max == 3.0);
}

TEST_CASE("busemann_field matches the Minkowski closed form") {
    const MetricChart c = models::minkowski(2, {{-1.0, 11.0}, {-1.5, 1.5}});
    const Grid g(c, {241, 61});
    const CausalGraph cg(g, 3);
    const Line line = comoving_line(c, VecN::Zero(1), 0.0);
    BusemannOptions opts;
    opts.refine_window = [](const VecN& x) { return std::abs(x[0]) <= 1.2; };
    opts.refine_opts.resample_segments = 16;
    const BusemannField bf = busemann_field(cg, line, 10.0, +1, opts);
    // Spec-level examples: b = 10 - sqrt(99) at (0, 1); b = 1 at (1, 0).
    const long n1 = g.flat(g.nearest(vec2(0.0, 1.0)));
    const long n2 = g.flat(g.nearest(vec2(1.0, 0.0)));
    REQUIRE(bf.values.valid(n1));
    REQUIRE(bf.values.valid(n2));
    CHECK(bf.values.values[n1] == Catch::Approx(10.0 - std::sqrt(99.0)).margin(2e-3));
    CHECK(bf.values.values[n2] == Catch::Approx(1.0).margin(2e-3));
    // Zero on the line's origin by construction.
    const long o = g.flat(g.nearest(vec2(0.0, 0.0)));
    CHECK(std::abs(bf.values.values[o]) < 1e-12);
    // Sweep the refined window against the closed form.
    double worst = 0.0;
    for (long i = 0; i < g.size(); ++i) {
        if (!bf.values.valid(i)) continue;
        const VecN x = g.point(i);
        if (std::abs(x[0]) > 1.0 || std::abs(x[1]) > 1.0) continue;
        worst = std::max(worst, std::abs(bf.values.values[i] - br_plus_exact(10.0, x[0], x[1])));
    }
    CHECK(worst < 5e-3);
    // Nodes outside the causal past of gamma(10) are masked.
    const long far = g.flat(g.nearest(vec2(10.9, 1.4)));
    CHECK_FALSE(bf.values.valid(far));
    // gamma(r) outside the chart is rejected.
    REQUIRE_THROWS_AS(busemann_field(cg, line, 20.0, +1), std::domain_error);
}

TEST_CASE("busemann_limit: decreasing Cauchy gaps and monotonicity in r") {
    const MetricChart c = models::minkowski(2, {{-18.0, 18.0}, {-1.0, 1.0}});
    const Grid g(c, {361, 21});
    const CausalGraph cg(g, 3);
    const Line line = comoving_line(c, VecN::Zero(1), 0.0);
    BusemannOptions opts;
    opts.refine_window = [](const VecN& x) { return std::abs(x[0]) <= 1.0; };
    opts.refine_opts.resample_segments = 16;
    std::vector<double> gaps;
    const BusemannField b = busemann_limit(cg, line, +1, {2.0, 4.0, 8.0, 16.0}, opts, &gaps);
    REQUIRE(gaps.size() == 3);
    CHECK(gaps[1] < gaps[0]);
    CHECK(gaps[2] < gaps[1]);
    CHECK(b.monotonicity_violations == 0);
    CHECK_FALSE(b.truncated);
    CHECK(b.r == 16.0);
    // Truncation: ladder leaving the chart keeps the last reachable field.
    const BusemannField t = busemann_limit(cg, line, +1, {2.0, 4.0, 40.0}, opts);
    CHECK(t.truncated);
    CHECK(t.r == 4.0);
    REQUIRE_THROWS_AS(busemann_limit(cg, line, +1, {40.0}, opts), std::domain_error);
    REQUIRE_THROWS_AS(busemann_limit(cg, line, +1, {}, opts), std::invalid_argument);
}

TEST_CASE("steepness and ordering diagnostics pass on Minkowski") {
    const MetricChart c = models::minkowski(2, {{-18.0, 18.0}, {-1.0, 1.0}});
    const Grid g(c, {361, 21});
    const CausalGraph cg(g, 3);
    const Line line = comoving_line(c, VecN::Zero(1), 0.0);
    BusemannOptions opts;
    opts.refine_window = [](const VecN& x) { return std::abs(x[0]) <= 1.0; };
    opts.refine_opts.resample_segments = 16;
    const std::vector<double> ladder{2.0, 4.0, 8.0, 16.0};
    const BusemannField b_plus = busemann_limit(cg, line, +1, ladder, opts);
    const BusemannField b_minus = busemann_limit(cg, line, -1, ladder, opts);
    const BusemannField br_plus = busemann_field(cg, line, 2.0, +1, opts);
    const BusemannField br_minus = busemann_field(cg, line, -2.0, -1, opts);
    const OrderingReport rep =
        steepness_ordering_check(br_plus, b_plus, b_minus, br_minus, cg, line, 48, 9, opts);
    CHECK(rep.pairs_checked > 0);
    CHECK(rep.chain_worst <= 1e-6);
    CHECK(rep.at_origin_spread <= 1e-6);
    CHECK(rep.steepness_worst <= 1e-6);
}

TEST_CASE("eikonal check on the limit field") {
    // b = t is the exact limit; feed it directly to isolate the statistic.
    const MetricChart c = models::minkowski(2, {{-1.0, 1.0}, {-1.0, 1.0}});
    const Grid g(c, {41, 41});
    BusemannField bf{ScalarField(g), ScalarField(g), 0.0, +1};
    for (long i = 0; i < g.size(); ++i) bf.values.values[i] = g.point(i)[0];
    const EikonalReport rep = eikonal_check(bf);
    CHECK(rep.smooth_nodes > 0);
    CHECK(rep.nonsmooth_nodes == 0);
    CHECK(rep.worst < 1e-12);
    // A field with spacelike gradient counts as nonsmooth, not as eikonal.
    for (long i = 0; i < g.size(); ++i) bf.values.values[i] = g.point(i)[1];
    CHECK(eikonal_check(bf).smooth_nodes == 0);
}

TEST_CASE("riemannianized metric flips the spatial signature") {
    MatN g(2, 2);
    g << 1.0, 0.0, 0.0, -4.0;
    const MatN gt = riemannianized_metric(g);
    CHECK(gt(0, 0) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(gt(1, 1) == Catch::Approx(4.0).epsilon(1e-12));
    CHECK(std::abs(gt(0, 1)) < 1e-14);
    // Already-Riemannian input is a fixed point.
    CHECK((riemannianized_metric(gt) - gt).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("regularity diagnostics: Lipschitz and semiconcavity of b = t") {
    const MetricChart c = models::minkowski(2, {{-1.0, 1.0}, {-1.0, 1.0}});
    const Grid g(c, {41, 41});
    const CausalGraph cg(g, 2);
    BusemannField bf{ScalarField(g), ScalarField(g), 0.0, +1};
    for (long i = 0; i < g.size(); ++i) bf.values.values[i] = g.point(i)[0];
    const RegularityReport rep = regularity_diagnostics({&bf}, cg);
    // |b(x)-b(y)| = |t_x - t_y| <= d~(x,y): Lipschitz constant 1.
    CHECK(rep.lipschitz == Catch::Approx(1.0).epsilon(1e-10));
    // Linear fields have vanishing second differences.
    CHECK(std::abs(rep.semiconcavity) < 1e-10);
}

TEST_CASE("busemann_field on the product circle wraps the cut locus") {
    // b_r^+ at the antipode theta = pi must use the shorter arc on either
    // side; the field stays symmetric under theta -> 2*pi - theta.
    const MetricChart c = models::product_circle(1.0, {-9.0, 9.0});
    const Grid g(c, {181, 24});
    const CausalGraph cg(g, 3);
    const Line line = comoving_line(c, VecN::Zero(1), 0.0);
    const BusemannField bf = busemann_field(cg, line, 8.0, +1);
    for (int j = 1; j < 12; ++j) {
        const long a = g.flat({90, j});
        const long b = g.flat({90, 24 - j});
        if (!bf.values.valid(a) || !bf.values.valid(b)) continue;
        CHECK(bf.values.values[a] == Catch::Approx(bf.values.values[b]).margin(1e-9));
    }
}
