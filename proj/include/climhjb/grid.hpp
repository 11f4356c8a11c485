#ifndef CLIMHJB_GRID_HPP
#define CLIMHJB_GRID_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "climhjb/state.hpp"

namespace climhjb {

/// Rectangular (log K, R, y) grid for the post-jump solves.
struct GridSpec {
    std::array<double, 3> lo{4.0, 0.01, 0.0};
    std::array<double, 3> hi{8.5, 0.99, 4.0};
    std::array<int, 3> n{61, 51, 41};

    void validate() const;
    double step(int d) const { return (hi[d] - lo[d]) / double(n[d] - 1); }
    double coord(int d, int i) const { return lo[d] + step(d) * double(i); }
    std::size_t total() const {
        return std::size_t(n[0]) * std::size_t(n[1]) * std::size_t(n[2]);
    }
    std::size_t index(int i, int j, int k) const {
        return (std::size_t(i) * n[1] + std::size_t(j)) * n[2] + std::size_t(k);
    }
    bool contains(double x0, double x1, double x2, double tol = 1e-12) const;

    /// Same bounds, 2n-1 points per dimension, so every coarse node is a fine node.
    GridSpec refined() const;

    bool operator==(const GridSpec& o) const = default;
};

/// Value function samples on a GridSpec, with finite-difference derivative
/// queries and multilinear interpolation off the nodes.
class GridField : public ValueField {
public:
    GridField() = default;
    GridField(GridSpec spec, JumpState jump, std::string param_hash, std::string xi_tag);

    const GridSpec& spec() const { return spec_; }
    const JumpState& jump() const { return jump_; }
    const std::string& param_hash() const { return param_hash_; }
    const std::string& xi_tag() const { return xi_tag_; }

    double& at(int i, int j, int k) { return v_[spec_.index(i, j, k)]; }
    double at(int i, int j, int k) const { return v_[spec_.index(i, j, k)]; }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    double interp(double log_k, double r, double y) const;

    /// Full derivative set at a node: central differences in the interior,
    /// second-order one-sided stencils on the boundary, mixed differences for
    /// the (log K, R) cross term.
    ValueEval node_eval(int i, int j, int k) const;

    /// Derivatives at an arbitrary in-bounds point (multilinear blend of the
    /// nodal stencil values). Throws SolveError outside the box.
    ValueEval derivatives_at(double log_k, double r, double y) const;

    // ValueField interface; y_hat is the third axis, log_kappa ignored.
    ValueEval eval(const State& s) const override {
        return derivatives_at(s.log_k, s.r, s.y_hat);
    }
    double value(const State& s) const override { return interp(s.log_k, s.r, s.y_hat); }

    void save(const std::string& path) const;
    static GridField load(const std::string& path);

private:
    GridSpec spec_;
    JumpState jump_;
    std::string param_hash_;
    std::string xi_tag_;
    std::vector<double> v_;
};

}  // namespace climhjb

#endif
