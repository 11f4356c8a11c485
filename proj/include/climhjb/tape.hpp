#ifndef CLIMHJB_TAPE_HPP
#define CLIMHJB_TAPE_HPP

// Reverse-mode autodiff over small dense matrices, batched along columns.
// Values are computed eagerly when an op is recorded; backward() replays the
// tape in reverse and accumulates adjoints. One graph instance is rebuilt per
// training step and its storage is recycled.

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace climhjb::tape {

class Graph;

struct Var {
    Graph* g = nullptr;
    int id = -1;
    int rows = 0, cols = 0;
    bool valid() const { return g != nullptr; }
};

class Graph {
public:
    Graph() = default;

    /// Drops all nodes but keeps allocated storage.
    void clear();

    // ----- leaves -----
    Var input(const double* data, int rows, int cols);  // constant w.r.t. backward
    Var param(const double* data, int rows, int cols);  // adjoint retrievable
    Var constant_fill(double value, int rows, int cols);

    // ----- ops -----
    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var add_bias(Var a, Var b);  // a[m x n] + broadcast b[m x 1]
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var div(Var a, Var b);
    Var scale(Var a, double c);
    Var add_const(Var a, double c);
    Var neg(Var a);
    Var tanh_op(Var a);
    Var sigmoid_op(Var a);
    Var exp_op(Var a);
    Var expm1_op(Var a);
    Var log_op(Var a);
    Var pow_const(Var a, double p);
    Var square_op(Var a);
    Var clamp_min_op(Var a, double lo);
    Var clamp_both_op(Var a, double lo, double hi);
    Var row(Var a, int r);
    Var mean_all(Var a);
    Var sum_all(Var a);

    // ----- access -----
    const double* data(Var v) const { return values_.data() + nodes_[v.id].val_off; }
    double scalar(Var v) const {
        assert(v.rows == 1 && v.cols == 1);
        return data(v)[0];
    }
    long long count_below(Var v, double lo) const;
    long long count_outside(Var v, double lo, double hi) const;

    /// Zeroes all adjoints, seeds d(loss) = 1 and accumulates; loss is [1 x 1].
    void backward(Var loss);
    const double* grad(Var v) const { return adjoints_.data() + nodes_[v.id].val_off; }

    std::size_t node_count() const { return nodes_.size(); }

private:
    enum class Op : std::uint8_t {
        Leaf, MatMul, Add, AddBias, Sub, Mul, Div, Scale, AddConst, Neg,
        Tanh, Sigmoid, Exp, Expm1, Log, PowConst, Square, ClampMin, ClampBoth,
        Row, MeanAll, SumAll
    };
    struct Node {
        Op op;
        bool needs_grad;
        int a = -1, b = -1;
        int rows, cols;
        double c0 = 0, c1 = 0;
        std::size_t val_off;
    };

    Var alloc(Op op, int rows, int cols, int a, int b, double c0 = 0, double c1 = 0);
    double* val(int id) { return values_.data() + nodes_[id].val_off; }
    const double* val(int id) const { return values_.data() + nodes_[id].val_off; }
    double* adj(int id) { return adjoints_.data() + nodes_[id].val_off; }
    std::size_t len(int id) const {
        return std::size_t(nodes_[id].rows) * nodes_[id].cols;
    }

    std::vector<Node> nodes_;
    std::vector<double> values_;
    std::vector<double> adjoints_;
};

// ----- operator sugar so the templated HJB code reads like scalar math -----

inline Var operator+(Var a, Var b) { return a.g->add(a, b); }
inline Var operator+(Var a, double c) { return a.g->add_const(a, c); }
inline Var operator+(double c, Var a) { return a.g->add_const(a, c); }
inline Var operator-(Var a, Var b) { return a.g->sub(a, b); }
inline Var operator-(Var a, double c) { return a.g->add_const(a, -c); }
inline Var operator-(double c, Var a) { return a.g->add_const(a.g->neg(a), c); }
inline Var operator-(Var a) { return a.g->neg(a); }
inline Var operator*(Var a, Var b) { return a.g->mul(a, b); }
inline Var operator*(Var a, double c) { return a.g->scale(a, c); }
inline Var operator*(double c, Var a) { return a.g->scale(a, c); }
inline Var operator/(Var a, Var b) { return a.g->div(a, b); }
inline Var operator/(Var a, double c) { return a.g->scale(a, 1.0 / c); }

inline Var tanh(Var a) { return a.g->tanh_op(a); }
inline Var sigmoid(Var a) { return a.g->sigmoid_op(a); }
inline Var exp(Var a) { return a.g->exp_op(a); }
inline Var expm1(Var a) { return a.g->expm1_op(a); }
inline Var log(Var a) { return a.g->log_op(a); }
inline Var pow(Var a, double p) { return a.g->pow_const(a, p); }
inline Var square(Var a) { return a.g->square_op(a); }
inline Var clamp_min(Var a, double lo) { return a.g->clamp_min_op(a, lo); }
inline Var clamp_both(Var a, double lo, double hi) { return a.g->clamp_both_op(a, lo, hi); }
inline long long count_clamped(Var a, double lo) { return a.g->count_below(a, lo); }
inline long long count_outside(Var a, double lo, double hi) {
    return a.g->count_outside(a, lo, hi);
}

}  // namespace climhjb::tape

#endif
