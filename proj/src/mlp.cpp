#include "climhjb/mlp.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

namespace climhjb {

void MlpSpec::validate() const {
    if (input_dim < 1 || hidden_layers < 1 || hidden_width < 1)
        throw ConfigError("bad network dimensions");
    if (outputs.empty()) throw ConfigError("network needs at least one output");
    if ((int)in_shift.size() != input_dim || (int)in_scale.size() != input_dim)
        throw ConfigError("input normalization size mismatch");
    for (const Output& o : outputs)
        if (o.act != Act::Identity && !(o.lo < o.hi))
            throw ConfigError("squashing map needs lo < hi");
}

std::string MlpSpec::describe() const {
    std::ostringstream os;
    os << input_dim << ' ' << hidden_layers << ' ' << hidden_width << ' '
       << outputs.size();
    for (const Output& o : outputs) {
        const char* k = o.act == Act::Identity ? "id"
                        : o.act == Act::ScaledTanh ? "tanh"
                                                   : "sigmoid";
        os << ' ' << k << ' ' << fmt_g17(o.lo) << ' ' << fmt_g17(o.hi);
    }
    for (double v : in_shift) os << ' ' << fmt_g17(v);
    for (double v : in_scale) os << ' ' << fmt_g17(v);
    return os.str();
}

MlpSpec MlpSpec::parse(const std::string& line) {
    std::istringstream is(line);
    MlpSpec s;
    std::size_t n_out = 0;
    if (!(is >> s.input_dim >> s.hidden_layers >> s.hidden_width >> n_out))
        throw IoError("bad network spec line");
    s.outputs.resize(n_out);
    for (Output& o : s.outputs) {
        std::string k;
        if (!(is >> k >> o.lo >> o.hi)) throw IoError("bad network output spec");
        o.act = k == "id" ? Act::Identity : k == "tanh" ? Act::ScaledTanh : Act::Sigmoid;
    }
    s.in_shift.resize(s.input_dim);
    s.in_scale.resize(s.input_dim);
    for (double& v : s.in_shift)
        if (!(is >> v)) throw IoError("bad network normalization");
    for (double& v : s.in_scale)
        if (!(is >> v)) throw IoError("bad network normalization");
    s.validate();
    return s;
}

namespace {

std::vector<int> layer_widths(const MlpSpec& s) {
    std::vector<int> w;
    w.push_back(s.input_dim);
    for (int l = 0; l < s.hidden_layers; ++l) w.push_back(s.hidden_width);
    w.push_back(s.output_dim());
    return w;
}

double apply_output(const MlpSpec::Output& o, double z) {
    switch (o.act) {
        case MlpSpec::Act::Identity: return z;
        case MlpSpec::Act::ScaledTanh:
            return 0.5 * (o.lo + o.hi) + 0.5 * (o.hi - o.lo) * std::tanh(z);
        case MlpSpec::Act::Sigmoid:
            return o.lo + (o.hi - o.lo) / (1.0 + std::exp(-z));
    }
    return z;
}

}  // namespace

void Mlp::init(Rng& rng) {
    spec.validate();
    auto widths = layer_widths(spec);
    W.clear();
    b.clear();
    for (std::size_t l = 1; l < widths.size(); ++l) {
        int fan_in = widths[l - 1], out = widths[l];
        double bound = 1.0 / std::sqrt(double(fan_in));
        std::vector<double> w(std::size_t(out) * fan_in);
        for (double& x : w) x = rng.uniform(-bound, bound);
        W.push_back(std::move(w));
        b.push_back(std::vector<double>(out, 0.0));
    }
}

std::size_t Mlp::param_count() const {
    std::size_t n = 0;
    for (const auto& w : W) n += w.size();
    for (const auto& bb : b) n += bb.size();
    return n;
}

void Mlp::flatten(std::vector<double>& out) const {
    out.clear();
    out.reserve(param_count());
    for (std::size_t l = 0; l < W.size(); ++l) {
        out.insert(out.end(), W[l].begin(), W[l].end());
        out.insert(out.end(), b[l].begin(), b[l].end());
    }
}

void Mlp::unflatten(const double* data) {
    for (std::size_t l = 0; l < W.size(); ++l) {
        std::memcpy(W[l].data(), data, W[l].size() * sizeof(double));
        data += W[l].size();
        std::memcpy(b[l].data(), data, b[l].size() * sizeof(double));
        data += b[l].size();
    }
}

std::string Mlp::weight_hash() const {
    std::vector<double> flat;
    flatten(flat);
    std::string bytes(reinterpret_cast<const char*>(flat.data()),
                      flat.size() * sizeof(double));
    return hex16(fnv1a64(bytes));
}

void Mlp::forward(const double* x, double* out) const {
    const int in = spec.input_dim;
    std::vector<double> cur(in), next;
    for (int i = 0; i < in; ++i) cur[i] = (x[i] - spec.in_shift[i]) * spec.in_scale[i];
    auto widths = layer_widths(spec);
    for (std::size_t l = 0; l < W.size(); ++l) {
        const int m = widths[l + 1], k = widths[l];
        next.assign(m, 0.0);
        for (int i = 0; i < m; ++i) {
            double z = b[l][i];
            const double* wi = W[l].data() + std::size_t(i) * k;
            for (int j = 0; j < k; ++j) z += wi[j] * cur[j];
            next[i] = l + 1 < W.size() ? std::tanh(z) : z;
        }
        cur.swap(next);
    }
    for (int i = 0; i < spec.output_dim(); ++i) out[i] = apply_output(spec.outputs[i], cur[i]);
}

// ---------------------------------------------------------------------------
// exact derivatives of a scalar net
// ---------------------------------------------------------------------------

namespace {

struct Cache {
    std::vector<std::vector<double>> h;  // h[0] = normalized input, then activations
    double out = 0;
};

void forward_cached(const Mlp& net, const double* x, Cache& c) {
    const MlpSpec& s = net.spec;
    auto widths = layer_widths(s);
    c.h.assign(widths.size(), {});
    c.h[0].resize(s.input_dim);
    for (int i = 0; i < s.input_dim; ++i)
        c.h[0][i] = (x[i] - s.in_shift[i]) * s.in_scale[i];
    for (std::size_t l = 0; l < net.W.size(); ++l) {
        const int m = widths[l + 1], k = widths[l];
        c.h[l + 1].assign(m, 0.0);
        for (int i = 0; i < m; ++i) {
            double z = net.b[l][i];
            const double* wi = net.W[l].data() + std::size_t(i) * k;
            for (int j = 0; j < k; ++j) z += wi[j] * c.h[l][j];
            c.h[l + 1][i] = l + 1 < net.W.size() ? std::tanh(z) : z;
        }
    }
    c.out = c.h.back()[0];
}

/// Reverse accumulation: gradient with respect to the normalized inputs.
void gradient_normed(const Mlp& net, const Cache& c, std::vector<double>& grad) {
    auto widths = layer_widths(net.spec);
    const int L = (int)net.W.size();
    std::vector<double> delta = {1.0};  // adjoint of the linear head
    for (int l = L - 1; l >= 0; --l) {
        const int m = widths[l + 1], k = widths[l];
        if (l < L - 1)  // chain through tanh at this layer's output
            for (int i = 0; i < m; ++i) delta[i] *= 1.0 - sq(c.h[l + 1][i]);
        std::vector<double> prev(k, 0.0);
        for (int i = 0; i < m; ++i) {
            const double* wi = net.W[l].data() + std::size_t(i) * k;
            for (int j = 0; j < k; ++j) prev[j] += wi[j] * delta[i];
        }
        delta.swap(prev);
    }
    grad = delta;
}

/// Forward-over-reverse sweep: H u with respect to the normalized inputs.
void hvp_normed(const Mlp& net, const Cache& c, const std::vector<double>& u,
                std::vector<double>& hv) {
    auto widths = layer_widths(net.spec);
    const int L = (int)net.W.size();

    // tangent pass
    std::vector<std::vector<double>> rz(L);  // tangent of pre-activations
    std::vector<double> rh = u;
    for (int l = 0; l < L; ++l) {
        const int m = widths[l + 1], k = widths[l];
        rz[l].assign(m, 0.0);
        for (int i = 0; i < m; ++i) {
            const double* wi = net.W[l].data() + std::size_t(i) * k;
            double t = 0;
            for (int j = 0; j < k; ++j) t += wi[j] * rh[j];
            rz[l][i] = t;
        }
        if (l < L - 1) {
            rh.assign(m, 0.0);
            for (int i = 0; i < m; ++i) rh[i] = (1.0 - sq(c.h[l + 1][i])) * rz[l][i];
        }
    }

    // reverse pass carrying (delta, R{delta})
    std::vector<double> delta = {1.0}, rdelta = {0.0};
    for (int l = L - 1; l >= 0; --l) {
        const int m = widths[l + 1], k = widths[l];
        if (l < L - 1) {
            for (int i = 0; i < m; ++i) {
                const double hi = c.h[l + 1][i];
                const double d1 = 1.0 - sq(hi);
                const double d2 = -2.0 * hi * d1;
                rdelta[i] = d2 * rz[l][i] * delta[i] + d1 * rdelta[i];
                delta[i] *= d1;
            }
        }
        std::vector<double> pd(k, 0.0), prd(k, 0.0);
        for (int i = 0; i < m; ++i) {
            const double* wi = net.W[l].data() + std::size_t(i) * k;
            for (int j = 0; j < k; ++j) {
                pd[j] += wi[j] * delta[i];
                prd[j] += wi[j] * rdelta[i];
            }
        }
        delta.swap(pd);
        rdelta.swap(prd);
    }
    hv = rdelta;
}

}  // namespace

ValueEval mlp_value_eval(const Mlp& net, const double* x, int n_state) {
    const MlpSpec& s = net.spec;
    if (s.output_dim() != 1 || s.outputs[0].act != MlpSpec::Act::Identity)
        throw SolveError("derivative evaluation requires a scalar identity-output net");
    if (n_state < 3 || n_state > 4 || n_state > s.input_dim)
        throw SolveError("bad state dimension for derivative evaluation");

    Cache c;
    forward_cached(net, x, c);

    std::vector<double> grad;
    gradient_normed(net, c, grad);

    ValueEval e;
    e.has_kappa = n_state == 4;
    e.v = c.out;
    const auto& sc = s.in_scale;
    e.v_k = grad[0] * sc[0];
    e.v_r = grad[1] * sc[1];
    e.v_y = grad[2] * sc[2];
    e.v_x = n_state == 4 ? grad[3] * sc[3] : 0.0;

    std::vector<double> u(s.input_dim, 0.0), hv;
    auto sweep = [&](int d) {
        std::fill(u.begin(), u.end(), 0.0);
        u[d] = 1.0;
        hvp_normed(net, c, u, hv);
    };
    sweep(0);
    e.v_kk = hv[0] * sc[0] * sc[0];
    e.v_kr = hv[1] * sc[0] * sc[1];
    sweep(1);
    e.v_rr = hv[1] * sc[1] * sc[1];
    sweep(2);
    e.v_yy = hv[2] * sc[2] * sc[2];
    if (n_state == 4) {
        sweep(3);
        e.v_xx = hv[3] * sc[3] * sc[3];
    }
    return e;
}

// ---------------------------------------------------------------------------
// tape builders
// ---------------------------------------------------------------------------

TapeNet tape_register(tape::Graph& g, const Mlp& net) {
    auto widths = layer_widths(net.spec);
    TapeNet tn;
    for (std::size_t l = 0; l < net.W.size(); ++l) {
        tn.W.push_back(g.param(net.W[l].data(), widths[l + 1], widths[l]));
        tn.b.push_back(g.param(net.b[l].data(), widths[l + 1], 1));
    }
    return tn;
}

void tape_collect_grads(const tape::Graph& g, const TapeNet& tn,
                        std::vector<double>& out) {
    out.clear();
    for (std::size_t l = 0; l < tn.W.size(); ++l) {
        const double* gw = g.grad(tn.W[l]);
        out.insert(out.end(), gw, gw + std::size_t(tn.W[l].rows) * tn.W[l].cols);
        const double* gb = g.grad(tn.b[l]);
        out.insert(out.end(), gb, gb + tn.b[l].rows);
    }
}

namespace {

/// Hidden stack shared by all tape forwards; returns per-layer activations and
/// tanh derivative factors.
struct TapeStack {
    std::vector<tape::Var> h;   // h[0] = xn, then activations, back() = linear head
    std::vector<tape::Var> d1;  // 1 - h^2 per hidden layer
    std::vector<tape::Var> d2;  // -2 h (1 - h^2) per hidden layer (lazy)
};

TapeStack tape_stack(tape::Graph& g, const TapeNet& tn, tape::Var xn, bool want_d2) {
    TapeStack st;
    st.h.push_back(xn);
    const int L = (int)tn.W.size();
    for (int l = 0; l < L; ++l) {
        tape::Var z = g.add_bias(g.matmul(tn.W[l], st.h.back()), tn.b[l]);
        if (l < L - 1) {
            tape::Var h = g.tanh_op(z);
            tape::Var d1 = g.add_const(g.neg(g.square_op(h)), 1.0);
            st.h.push_back(h);
            st.d1.push_back(d1);
            if (want_d2) st.d2.push_back(g.mul(g.scale(h, -2.0), d1));
        } else {
            st.h.push_back(z);
        }
    }
    return st;
}

/// First-order tangent chain along a normalized-coordinate direction.
struct Tangent {
    std::vector<tape::Var> t;  // tangent of activations per level (t[0] = seed)
    std::vector<tape::Var> z;  // tangent of pre-activations per hidden layer
    tape::Var head;            // tangent of the linear head [out x B]
};

Tangent tape_tangent(tape::Graph& g, const TapeNet& tn, const TapeStack& st,
                     tape::Var seed) {
    Tangent tg;
    tg.t.push_back(seed);
    const int L = (int)tn.W.size();
    for (int l = 0; l < L; ++l) {
        tape::Var tz = g.matmul(tn.W[l], tg.t.back());
        if (l < L - 1) {
            tg.z.push_back(tz);
            tg.t.push_back(g.mul(st.d1[l], tz));
        } else {
            tg.head = tz;
        }
    }
    return tg;
}

/// Second-order tangent along directions (u, w) given their first-order chains.
/// The second tangent of the input is zero, so the first layer keeps only the
/// curvature product.
tape::Var tape_second(tape::Graph& g, const TapeNet& tn, const TapeStack& st,
                      const Tangent& tu, const Tangent& tw) {
    const int L = (int)tn.W.size();
    tape::Var p{};
    for (int l = 0; l < L; ++l) {
        if (l == 0) {
            p = g.mul(st.d2[0], g.mul(tu.z[0], tw.z[0]));
            continue;
        }
        tape::Var pz = g.matmul(tn.W[l], p);
        if (l < L - 1)
            p = g.add(g.mul(st.d2[l], g.mul(tu.z[l], tw.z[l])), g.mul(st.d1[l], pz));
        else
            p = pz;
    }
    return p;
}

}  // namespace

tape::Var tape_value_forward(tape::Graph& g, const TapeNet& tn, const MlpSpec& spec,
                             tape::Var xn) {
    (void)spec;
    TapeStack st = tape_stack(g, tn, xn, false);
    return st.h.back();
}

TapeValueEval tape_value_eval(tape::Graph& g, const TapeNet& tn, const MlpSpec& spec,
                              tape::Var xn, int n_state) {
    const int B = xn.cols;
    TapeStack st = tape_stack(g, tn, xn, true);

    std::vector<double> seed_buf(std::size_t(spec.input_dim) * B, 0.0);
    auto onehot = [&](int d) {
        std::fill(seed_buf.begin(), seed_buf.end(), 0.0);
        std::fill(seed_buf.begin() + std::size_t(d) * B,
                  seed_buf.begin() + std::size_t(d + 1) * B, 1.0);
        return g.input(seed_buf.data(), spec.input_dim, B);
    };
    std::vector<Tangent> tg(n_state);
    for (int d = 0; d < n_state; ++d) tg[d] = tape_tangent(g, tn, st, onehot(d));

    TapeValueEval out;
    out.v = st.h.back();
    const auto& sc = spec.in_scale;
    for (int d = 0; d < n_state; ++d) out.d1[d] = g.scale(tg[d].head, sc[d]);

    out.v_kk = g.scale(tape_second(g, tn, st, tg[0], tg[0]), sc[0] * sc[0]);
    out.v_rr = g.scale(tape_second(g, tn, st, tg[1], tg[1]), sc[1] * sc[1]);
    out.v_yy = g.scale(tape_second(g, tn, st, tg[2], tg[2]), sc[2] * sc[2]);
    out.v_kr = g.scale(tape_second(g, tn, st, tg[0], tg[1]), sc[0] * sc[1]);
    if (n_state == 4)
        out.v_xx = g.scale(tape_second(g, tn, st, tg[3], tg[3]), sc[3] * sc[3]);
    return out;
}

std::vector<tape::Var> tape_policy_forward(tape::Graph& g, const TapeNet& tn,
                                           const MlpSpec& spec, tape::Var xn) {
    TapeStack st = tape_stack(g, tn, xn, false);
    tape::Var head = st.h.back();
    std::vector<tape::Var> out;
    for (int i = 0; i < spec.output_dim(); ++i) {
        tape::Var z = g.row(head, i);
        const MlpSpec::Output& o = spec.outputs[i];
        switch (o.act) {
            case MlpSpec::Act::Identity:
                out.push_back(z);
                break;
            case MlpSpec::Act::ScaledTanh:
                out.push_back(g.add_const(g.scale(g.tanh_op(z), 0.5 * (o.hi - o.lo)),
                                          0.5 * (o.lo + o.hi)));
                break;
            case MlpSpec::Act::Sigmoid:
                out.push_back(
                    g.add_const(g.scale(g.sigmoid_op(z), o.hi - o.lo), o.lo));
                break;
        }
    }
    return out;
}

void normalize_batch(const MlpSpec& spec, std::vector<double>& x, int batch) {
    for (int d = 0; d < spec.input_dim; ++d)
        for (int j = 0; j < batch; ++j) {
            double& v = x[std::size_t(d) * batch + j];
            v = (v - spec.in_shift[d]) * spec.in_scale[d];
        }
}

}  // namespace climhjb
