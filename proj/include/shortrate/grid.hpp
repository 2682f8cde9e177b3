#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace shortrate {

struct UniformGrid {
    double r_min = 0.0;
    double r_max = 0.15;
    std::size_t nodes = 76;

    double step() const { return (r_max - r_min) / static_cast<double>(nodes - 1); }
    double node(std::size_t i) const;
    std::vector<double> coordinates() const;
    void validate() const;
};

/// How a grid function is continued outside [r_min, r_max].
struct Extension {
    enum class Kind { Clamp, Linear, Envelope };
    Kind kind = Kind::Clamp;
    double rate = 0.0;  // Envelope: f(edge) * exp(rate * (|y| - |edge|))

    static Extension clamp() { return {Kind::Clamp, 0.0}; }
    static Extension linear() { return {Kind::Linear, 0.0}; }
    static Extension envelope(double rate) { return {Kind::Envelope, rate}; }
};

class GridFunction {
public:
    GridFunction() = default;
    GridFunction(UniformGrid grid, std::vector<double> values);
    static GridFunction constant(const UniformGrid& grid, double value);

    const UniformGrid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    /// Piecewise-linear inside the grid, `ext` outside.
    double eval(double r, Extension ext = Extension::clamp()) const;

    /// Values at the nodes of `target`, which must lie inside this grid.
    GridFunction resample(const UniformGrid& target) const;

    /// Central differences at interior nodes, one-sided second order at the ends.
    std::vector<double> derivative() const;
    std::vector<double> second_derivative() const;

private:
    UniformGrid grid_;
    std::vector<double> values_;
};

double sup_abs_difference(const GridFunction& x, const GridFunction& y);

}  // namespace shortrate
