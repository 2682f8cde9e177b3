#include "shortrate/grid.hpp"

#include <algorithm>
#include <cmath>

#include "shortrate/errors.hpp"

namespace shortrate {

double UniformGrid::node(std::size_t i) const {
    if (i + 1 == nodes) return r_max;
    return r_min + static_cast<double>(i) * step();
}

std::vector<double> UniformGrid::coordinates() const {
    std::vector<double> out(nodes);
    for (std::size_t i = 0; i < nodes; ++i) out[i] = node(i);
    return out;
}

void UniformGrid::validate() const {
    if (!std::isfinite(r_min) || !std::isfinite(r_max) || !(r_min < r_max))
        throw InvalidInput("grid requires finite r_min < r_max");
    if (nodes < 3) throw InvalidInput("grid requires at least 3 nodes");
}

GridFunction::GridFunction(UniformGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    grid_.validate();
    if (values_.size() != grid_.nodes) throw InvalidInput("grid function size does not match its grid");
    for (double v : values_)
        if (!std::isfinite(v)) throw NumericalError("grid function value is not finite");
}

GridFunction GridFunction::constant(const UniformGrid& grid, double value) {
    return GridFunction(grid, std::vector<double>(grid.nodes, value));
}

double GridFunction::eval(double r, Extension ext) const {
    const double lo = grid_.r_min;
    const double hi = grid_.r_max;
    const std::size_t n = values_.size();
    if (r >= lo && r <= hi) {
        const double pos = (r - lo) / grid_.step();
        std::size_t i = static_cast<std::size_t>(pos);
        if (i >= n - 1) i = n - 2;
        const double w = pos - static_cast<double>(i);
        return (1.0 - w) * values_[i] + w * values_[i + 1];
    }
    const bool below = r < lo;
    const double edge = below ? lo : hi;
    const double f_edge = below ? values_.front() : values_.back();
    switch (ext.kind) {
        case Extension::Kind::Clamp:
            return f_edge;
        case Extension::Kind::Linear: {
            const double h = grid_.step();
            const double slope = below ? (values_[1] - values_[0]) / h : (values_[n - 1] - values_[n - 2]) / h;
            return f_edge + slope * (r - edge);
        }
        case Extension::Kind::Envelope:
            return f_edge * std::exp(ext.rate * (std::abs(r) - std::abs(edge)));
    }
    return f_edge;
}

GridFunction GridFunction::resample(const UniformGrid& target) const {
    const double slack = 1e-9 * grid_.step();
    if (target.r_min < grid_.r_min - slack || target.r_max > grid_.r_max + slack)
        throw InvalidInput("resample target extends beyond the source grid");
    std::vector<double> out(target.nodes);
    const double h = grid_.step();
    for (std::size_t i = 0; i < target.nodes; ++i) {
        const double r = target.node(i);
        const double pos = (r - grid_.r_min) / h;
        const double nearest = std::round(pos);
        if (std::abs(pos - nearest) < 1e-7 && nearest >= 0 && nearest < static_cast<double>(values_.size()))
            out[i] = values_[static_cast<std::size_t>(nearest)];
        else
            out[i] = eval(std::clamp(r, grid_.r_min, grid_.r_max));
    }
    return GridFunction(target, std::move(out));
}

std::vector<double> GridFunction::derivative() const {
    const std::size_t n = values_.size();
    const double h = grid_.step();
    std::vector<double> d(n);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (values_[i + 1] - values_[i - 1]) / (2.0 * h);
    d[0] = (-3.0 * values_[0] + 4.0 * values_[1] - values_[2]) / (2.0 * h);
    d[n - 1] = (3.0 * values_[n - 1] - 4.0 * values_[n - 2] + values_[n - 3]) / (2.0 * h);
    return d;
}

std::vector<double> GridFunction::second_derivative() const {
    const std::size_t n = values_.size();
    const double h2 = grid_.step() * grid_.step();
    std::vector<double> d(n);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (values_[i + 1] - 2.0 * values_[i] + values_[i - 1]) / h2;
    d[0] = d[1];
    d[n - 1] = d[n - 2];
    return d;
}

double sup_abs_difference(const GridFunction& x, const GridFunction& y) {
    if (x.size() != y.size()) throw InvalidInput("grid functions differ in size");
    double out = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) out = std::max(out, std::abs(x[i] - y[i]));
    return out;
}

}  // namespace shortrate
