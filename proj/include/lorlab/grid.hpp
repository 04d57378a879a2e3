#pragma once

// Rectangular lattice over a chart box and per-node scalar fields.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lorlab/chart.hpp"
#include "lorlab/linalg.hpp"

namespace lorlab {

class Grid {
  public:
    Grid(const MetricChart& chart, std::vector<int> shape) : chart_(&chart), shape_(std::move(shape)) {
        if (static_cast<int>(shape_.size()) != chart.n)
            throw std::invalid_argument("Grid: shape rank must match chart dimension");
        spacing_.resize(chart.n);
        size_ = 1;
        for (int a = 0; a < chart.n; ++a) {
            if (shape_[a] < 2) throw std::invalid_argument("Grid: need >= 2 nodes per axis");
            // Periodic axes wrap: spacing * shape spans the extent.
            spacing_[a] = chart.periodic[a] ? chart.extent(a) / shape_[a]
                                            : chart.extent(a) / (shape_[a] - 1);
            size_ *= shape_[a];
        }
    }

    const MetricChart& chart() const { return *chart_; }
    const std::vector<int>& shape() const { return shape_; }
    const std::vector<double>& spacing() const { return spacing_; }
    int dim() const { return chart_->n; }
    long size() const { return size_; }

    long flat(const std::vector<int>& idx) const {
        long f = 0;
        for (int a = 0; a < dim(); ++a) f = f * shape_[a] + idx[a];
        return f;
    }
    std::vector<int> unflat(long f) const {
        std::vector<int> idx(dim());
        for (int a = dim() - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(f % shape_[a]);
            f /= shape_[a];
        }
        return idx;
    }

    VecN point(const std::vector<int>& idx) const {
        VecN x(dim());
        for (int a = 0; a < dim(); ++a) x[a] = chart_->box[a][0] + spacing_[a] * idx[a];
        return x;
    }
    VecN point(long f) const { return point(unflat(f)); }

    // Nearest node to x (spatial wrap on periodic axes).
    std::vector<int> nearest(const VecN& x) const {
        std::vector<int> idx(dim());
        for (int a = 0; a < dim(); ++a) {
            double u = (x[a] - chart_->box[a][0]) / spacing_[a];
            int i = static_cast<int>(std::lround(u));
            if (chart_->periodic[a]) {
                i %= shape_[a];
                if (i < 0) i += shape_[a];
            } else {
                i = std::max(0, std::min(shape_[a] - 1, i));
            }
            idx[a] = i;
        }
        return idx;
    }

    // Minimal displacement from node a to node b in chart coordinates,
    // accounting for periodic wrap.
    VecN displacement(const std::vector<int>& a, const std::vector<int>& b) const {
        VecN d(dim());
        for (int ax = 0; ax < dim(); ++ax) {
            double delta = (b[ax] - a[ax]) * spacing_[ax];
            if (chart_->periodic[ax]) {
                const double span = chart_->extent(ax);
                while (delta > 0.5 * span) delta -= span;
                while (delta < -0.5 * span) delta += span;
            }
            d[ax] = delta;
        }
        return d;
    }

    bool interior(const std::vector<int>& idx, int margin = 1) const {
        for (int a = 0; a < dim(); ++a) {
            if (chart_->periodic[a]) continue;
            if (idx[a] < margin || idx[a] > shape_[a] - 1 - margin) return false;
        }
        return true;
    }

  private:
    const MetricChart* chart_;
    std::vector<int> shape_;
    std::vector<double> spacing_;
    long size_ = 0;
};

struct ScalarField {
    const Grid* grid = nullptr;
    std::vector<double> values;
    std::vector<uint8_t> mask;  // 1 = valid

    explicit ScalarField(const Grid& g, double fill = 0.0, uint8_t m = 1)
        : grid(&g), values(g.size(), fill), mask(g.size(), m) {}

    double& at(long f) { return values[f]; }
    double at(long f) const { return values[f]; }
    bool valid(long f) const { return mask[f] != 0; }

    // Fill from a callback over chart points.
    static ScalarField sample(const Grid& g, const std::function<double(const VecN&)>& fn) {
        ScalarField f(g);
        for (long i = 0; i < g.size(); ++i) f.values[i] = fn(g.point(i));
        return f;
    }
};

// CSV field format: header line, then one row per node with coordinates,
// value and mask, 17 significant digits for lossless 64-bit round trips.
inline void write_field_csv(const ScalarField& f, std::ostream& os) {
    os << "# lorlab-field v1\n";
    os << std::setprecision(17);
    const Grid& g = *f.grid;
    for (long i = 0; i < g.size(); ++i) {
        const VecN x = g.point(i);
        for (int a = 0; a < g.dim(); ++a) os << x[a] << ",";
        os << f.values[i] << "," << int(f.mask[i]) << "\n";
    }
}

inline void write_field_csv(const ScalarField& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    write_field_csv(f, os);
}

// Reads values/mask back onto an existing grid (coordinates are checked
// against the grid layout).
inline ScalarField read_field_csv(const Grid& g, std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "# lorlab-field v1")
        throw std::runtime_error("bad field header");
    ScalarField f(g);
    for (long i = 0; i < g.size(); ++i) {
        if (!std::getline(is, line)) throw std::runtime_error("truncated field file");
        std::stringstream ss(line);
        std::string cell;
        const VecN x = g.point(i);
        for (int a = 0; a < g.dim(); ++a) {
            std::getline(ss, cell, ',');
            if (std::abs(std::stod(cell) - x[a]) > 1e-9)
                throw std::runtime_error("field file does not match grid layout");
        }
        std::getline(ss, cell, ',');
        f.values[i] = std::stod(cell);
        std::getline(ss, cell, ',');
        f.mask[i] = static_cast<uint8_t>(std::stoi(cell));
    }
    return f;
}

}  // namespace lorlab
