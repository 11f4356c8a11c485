#include "climhjb/tape.hpp"

#include <cmath>
#include <cstring>
#include <limits>

namespace climhjb::tape {

void Graph::clear() {
    nodes_.clear();
    values_.clear();
    adjoints_.clear();
}

Var Graph::alloc(Op op, int rows, int cols, int a, int b, double c0, double c1) {
    Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    n.rows = rows;
    n.cols = cols;
    n.c0 = c0;
    n.c1 = c1;
    n.val_off = values_.size();
    n.needs_grad = false;
    if (op != Op::Leaf) {
        if (a >= 0 && nodes_[a].needs_grad) n.needs_grad = true;
        if (b >= 0 && nodes_[b].needs_grad) n.needs_grad = true;
    }
    values_.resize(values_.size() + std::size_t(rows) * cols);
    nodes_.push_back(n);
    return Var{this, int(nodes_.size()) - 1, rows, cols};
}

Var Graph::input(const double* data, int rows, int cols) {
    Var v = alloc(Op::Leaf, rows, cols, -1, -1);
    std::memcpy(val(v.id), data, std::size_t(rows) * cols * sizeof(double));
    return v;
}

Var Graph::param(const double* data, int rows, int cols) {
    Var v = input(data, rows, cols);
    nodes_[v.id].needs_grad = true;
    return v;
}

Var Graph::constant_fill(double value, int rows, int cols) {
    Var v = alloc(Op::Leaf, rows, cols, -1, -1);
    double* d = val(v.id);
    for (std::size_t i = 0; i < len(v.id); ++i) d[i] = value;
    return v;
}

Var Graph::matmul(Var a, Var b) {
    assert(a.cols == b.rows);
    Var c = alloc(Op::MatMul, a.rows, b.cols, a.id, b.id);
    const double* A = val(a.id);
    const double* B = val(b.id);
    double* C = val(c.id);
    const int m = a.rows, k = a.cols, n = b.cols;
    std::memset(C, 0, std::size_t(m) * n * sizeof(double));
    for (int i = 0; i < m; ++i)
        for (int l = 0; l < k; ++l) {
            const double av = A[std::size_t(i) * k + l];
            if (av == 0.0) continue;
            const double* Bl = B + std::size_t(l) * n;
            double* Ci = C + std::size_t(i) * n;
            for (int j = 0; j < n; ++j) Ci[j] += av * Bl[j];
        }
    return c;
}

#define ELEMWISE_BINARY(NAME, OP, EXPR)                                   \
    Var Graph::NAME(Var a, Var b) {                                      \
        assert(a.rows == b.rows && a.cols == b.cols);                    \
        Var c = alloc(Op::OP, a.rows, a.cols, a.id, b.id);               \
        const double* x = val(a.id);                                     \
        const double* y = val(b.id);                                     \
        double* z = val(c.id);                                           \
        for (std::size_t i = 0; i < len(c.id); ++i) z[i] = EXPR;         \
        return c;                                                        \
    }

ELEMWISE_BINARY(add, Add, x[i] + y[i])
ELEMWISE_BINARY(sub, Sub, x[i] - y[i])
ELEMWISE_BINARY(mul, Mul, x[i] * y[i])
ELEMWISE_BINARY(div, Div, x[i] / y[i])
#undef ELEMWISE_BINARY

Var Graph::add_bias(Var a, Var b) {
    assert(b.cols == 1 && a.rows == b.rows);
    Var c = alloc(Op::AddBias, a.rows, a.cols, a.id, b.id);
    const double* x = val(a.id);
    const double* bias = val(b.id);
    double* z = val(c.id);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j)
            z[std::size_t(i) * a.cols + j] = x[std::size_t(i) * a.cols + j] + bias[i];
    return c;
}

#define ELEMWISE_UNARY(NAME, OP, EXPR)                                   \
    Var Graph::NAME(Var a) {                                             \
        Var c = alloc(Op::OP, a.rows, a.cols, a.id, -1);                 \
        const double* x = val(a.id);                                     \
        double* z = val(c.id);                                           \
        for (std::size_t i = 0; i < len(c.id); ++i) z[i] = EXPR;         \
        return c;                                                        \
    }

ELEMWISE_UNARY(neg, Neg, -x[i])
ELEMWISE_UNARY(tanh_op, Tanh, std::tanh(x[i]))
ELEMWISE_UNARY(sigmoid_op, Sigmoid, 1.0 / (1.0 + std::exp(-x[i])))
ELEMWISE_UNARY(exp_op, Exp, std::exp(x[i]))
ELEMWISE_UNARY(expm1_op, Expm1, std::expm1(x[i]))
ELEMWISE_UNARY(log_op, Log, std::log(x[i]))
ELEMWISE_UNARY(square_op, Square, x[i] * x[i])
#undef ELEMWISE_UNARY

Var Graph::scale(Var a, double s) {
    Var c = alloc(Op::Scale, a.rows, a.cols, a.id, -1, s);
    const double* x = val(a.id);
    double* z = val(c.id);
    for (std::size_t i = 0; i < len(c.id); ++i) z[i] = s * x[i];
    return c;
}

Var Graph::add_const(Var a, double s) {
    Var c = alloc(Op::AddConst, a.rows, a.cols, a.id, -1, s);
    const double* x = val(a.id);
    double* z = val(c.id);
    for (std::size_t i = 0; i < len(c.id); ++i) z[i] = x[i] + s;
    return c;
}

Var Graph::pow_const(Var a, double p) {
    Var c = alloc(Op::PowConst, a.rows, a.cols, a.id, -1, p);
    const double* x = val(a.id);
    double* z = val(c.id);
    for (std::size_t i = 0; i < len(c.id); ++i) z[i] = std::pow(x[i], p);
    return c;
}

Var Graph::clamp_min_op(Var a, double lo) {
    Var c = alloc(Op::ClampMin, a.rows, a.cols, a.id, -1, lo);
    const double* x = val(a.id);
    double* z = val(c.id);
    for (std::size_t i = 0; i < len(c.id); ++i) z[i] = x[i] < lo ? lo : x[i];
    return c;
}

Var Graph::clamp_both_op(Var a, double lo, double hi) {
    Var c = alloc(Op::ClampBoth, a.rows, a.cols, a.id, -1, lo, hi);
    const double* x = val(a.id);
    double* z = val(c.id);
    for (std::size_t i = 0; i < len(c.id); ++i)
        z[i] = x[i] < lo ? lo : (x[i] > hi ? hi : x[i]);
    return c;
}

Var Graph::row(Var a, int r) {
    assert(r >= 0 && r < a.rows);
    Var c = alloc(Op::Row, 1, a.cols, a.id, -1, double(r));
    std::memcpy(val(c.id), val(a.id) + std::size_t(r) * a.cols,
                std::size_t(a.cols) * sizeof(double));
    return c;
}

Var Graph::mean_all(Var a) {
    Var c = alloc(Op::MeanAll, 1, 1, a.id, -1);
    const double* x = val(a.id);
    double s = 0;
    for (std::size_t i = 0; i < len(a.id); ++i) s += x[i];
    val(c.id)[0] = s / double(len(a.id));
    return c;
}

Var Graph::sum_all(Var a) {
    Var c = alloc(Op::SumAll, 1, 1, a.id, -1);
    const double* x = val(a.id);
    double s = 0;
    for (std::size_t i = 0; i < len(a.id); ++i) s += x[i];
    val(c.id)[0] = s;
    return c;
}

long long Graph::count_below(Var v, double lo) const {
    const double* x = val(v.id);
    long long n = 0;
    for (std::size_t i = 0; i < len(v.id); ++i) n += x[i] < lo;
    return n;
}

long long Graph::count_outside(Var v, double lo, double hi) const {
    const double* x = val(v.id);
    long long n = 0;
    for (std::size_t i = 0; i < len(v.id); ++i) n += (x[i] < lo || x[i] > hi);
    return n;
}

void Graph::backward(Var loss) {
    assert(loss.rows == 1 && loss.cols == 1);
    adjoints_.assign(values_.size(), 0.0);
    adj(loss.id)[0] = 1.0;

    for (int id = loss.id; id >= 0; --id) {
        const Node& n = nodes_[id];
        if (!n.needs_grad || n.op == Op::Leaf) continue;
        const double* g = adj(id);
        const std::size_t count = len(id);
        const int a = n.a, b = n.b;
        const bool ga = a >= 0 && nodes_[a].needs_grad;
        const bool gb = b >= 0 && nodes_[b].needs_grad;

        switch (n.op) {
            case Op::MatMul: {
                const int m = nodes_[a].rows, k = nodes_[a].cols, nc = nodes_[b].cols;
                if (ga) {
                    double* da = adj(a);
                    const double* B = val(b);
                    for (int i = 0; i < m; ++i)
                        for (int l = 0; l < k; ++l) {
                            const double* gi = g + std::size_t(i) * nc;
                            const double* Bl = B + std::size_t(l) * nc;
                            double s = 0;
                            for (int j = 0; j < nc; ++j) s += gi[j] * Bl[j];
                            da[std::size_t(i) * k + l] += s;
                        }
                }
                if (gb) {
                    double* db = adj(b);
                    const double* A = val(a);
                    for (int l = 0; l < k; ++l)
                        for (int i = 0; i < m; ++i) {
                            const double av = A[std::size_t(i) * k + l];
                            if (av == 0.0) continue;
                            const double* gi = g + std::size_t(i) * nc;
                            double* dbl = db + std::size_t(l) * nc;
                            for (int j = 0; j < nc; ++j) dbl[j] += av * gi[j];
                        }
                }
                break;
            }
            case Op::Add: {
                if (ga) {
                    double* da = adj(a);
                    for (std::size_t i = 0; i < count; ++i) da[i] += g[i];
                }
                if (gb) {
                    double* db = adj(b);
                    for (std::size_t i = 0; i < count; ++i) db[i] += g[i];
                }
                break;
            }
            case Op::AddBias: {
                if (ga) {
                    double* da = adj(a);
                    for (std::size_t i = 0; i < count; ++i) da[i] += g[i];
                }
                if (gb) {
                    double* db = adj(b);
                    for (int i = 0; i < n.rows; ++i) {
                        double s = 0;
                        for (int j = 0; j < n.cols; ++j) s += g[std::size_t(i) * n.cols + j];
                        db[i] += s;
                    }
                }
                break;
            }
            case Op::Sub: {
                if (ga) {
                    double* da = adj(a);
                    for (std::size_t i = 0; i < count; ++i) da[i] += g[i];
                }
                if (gb) {
                    double* db = adj(b);
                    for (std::size_t i = 0; i < count; ++i) db[i] -= g[i];
                }
                break;
            }
            case Op::Mul: {
                const double* x = val(a);
                const double* y = val(b);
                if (ga) {
                    double* da = adj(a);
                    for (std::size_t i = 0; i < count; ++i) da[i] += g[i] * y[i];
                }
                if (gb) {
                    double* db = adj(b);
                    for (std::size_t i = 0; i < count; ++i) db[i] += g[i] * x[i];
                }
                break;
            }
            case Op::Div: {
                const double* x = val(a);
                const double* y = val(b);
                if (ga) {
                    double* da = adj(a);
                    for (std::size_t i = 0; i < count; ++i) da[i] += g[i] / y[i];
                }
                if (gb) {
                    double* db = adj(b);
                    for (std::size_t i = 0; i < count; ++i)
                        db[i] -= g[i] * x[i] / (y[i] * y[i]);
                }
                break;
            }
            case Op::Scale: {
                if (ga) {
                    double* da = adj(a);
                    for (std::size_t i = 0; i < count; ++i) da[i] += n.c0 * g[i];
                }
                break;
            }
            case Op::AddConst:
            case Op::ClampMin:
            case Op::ClampBoth: {
                if (ga) {
                    double* da = adj(a);
                    if (n.op == Op::AddConst) {
                        for (std::size_t i = 0; i < count; ++i) da[i] += g[i];
                    } else {
                        const double* x = val(a);
                        const double lo = n.c0;
                        const double hi = n.op == Op::ClampBoth
                                              ? n.c1
                                              : std::numeric_limits<double>::infinity();
                        for (std::size_t i = 0; i < count; ++i)
                            if (x[i] >= lo && x[i] <= hi) da[i] += g[i];
                    }
                }
                break;
            }
            case Op::Neg: {
                if (ga) {
                    double* da = adj(a);
                    for (std::size_t i = 0; i < count; ++i) da[i] -= g[i];
                }
                break;
            }
            case Op::Tanh: {
                if (ga) {
                    double* da = adj(a);
                    const double* z = val(id);
                    for (std::size_t i = 0; i < count; ++i)
                        da[i] += g[i] * (1.0 - z[i] * z[i]);
                }
                break;
            }
            case Op::Sigmoid: {
                if (ga) {
                    double* da = adj(a);
                    const double* z = val(id);
                    for (std::size_t i = 0; i < count; ++i)
                        da[i] += g[i] * z[i] * (1.0 - z[i]);
                }
                break;
            }
            case Op::Exp: {
                if (ga) {
                    double* da = adj(a);
                    const double* z = val(id);
                    for (std::size_t i = 0; i < count; ++i) da[i] += g[i] * z[i];
                }
                break;
            }
            case Op::Expm1: {
                if (ga) {
                    double* da = adj(a);
                    const double* z = val(id);
                    for (std::size_t i = 0; i < count; ++i) da[i] += g[i] * (z[i] + 1.0);
                }
                break;
            }
            case Op::Log: {
                if (ga) {
                    double* da = adj(a);
                    const double* x = val(a);
                    for (std::size_t i = 0; i < count; ++i) da[i] += g[i] / x[i];
                }
                break;
            }
            case Op::PowConst: {
                if (ga) {
                    double* da = adj(a);
                    const double* x = val(a);
                    const double p = n.c0;
                    for (std::size_t i = 0; i < count; ++i) {
                        double d = x[i] == 0.0 ? 0.0 : p * std::pow(x[i], p - 1.0);
                        da[i] += g[i] * d;
                    }
                }
                break;
            }
            case Op::Square: {
                if (ga) {
                    double* da = adj(a);
                    const double* x = val(a);
                    for (std::size_t i = 0; i < count; ++i) da[i] += g[i] * 2.0 * x[i];
                }
                break;
            }
            case Op::Row: {
                if (ga) {
                    double* da = adj(a) + std::size_t(int(n.c0)) * n.cols;
                    for (int j = 0; j < n.cols; ++j) da[j] += g[j];
                }
                break;
            }
            case Op::MeanAll: {
                if (ga) {
                    double* da = adj(a);
                    const double w = g[0] / double(len(a));
                    for (std::size_t i = 0; i < len(a); ++i) da[i] += w;
                }
                break;
            }
            case Op::SumAll: {
                if (ga) {
                    double* da = adj(a);
                    for (std::size_t i = 0; i < len(a); ++i) da[i] += g[0];
                }
                break;
            }
            case Op::Leaf:
                break;
        }
    }
}

}  // namespace climhjb::tape
