#include "climhjb/grid.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace climhjb {

void GridSpec::validate() const {
    for (int d = 0; d < 3; ++d) {
        if (n[d] < 8) throw ConfigError("grid needs at least 8 points per dimension");
        if (!(lo[d] < hi[d])) throw ConfigError("grid bounds must be increasing");
    }
}

bool GridSpec::contains(double x0, double x1, double x2, double tol) const {
    const double x[3] = {x0, x1, x2};
    for (int d = 0; d < 3; ++d)
        if (x[d] < lo[d] - tol || x[d] > hi[d] + tol) return false;
    return true;
}

GridSpec GridSpec::refined() const {
    GridSpec f = *this;
    for (int d = 0; d < 3; ++d) f.n[d] = 2 * n[d] - 1;
    return f;
}

GridField::GridField(GridSpec spec, JumpState jump, std::string param_hash,
                     std::string xi_tag)
    : spec_(spec), jump_(jump), param_hash_(std::move(param_hash)),
      xi_tag_(std::move(xi_tag)) {
    spec_.validate();
    v_.assign(spec_.total(), 0.0);
}

namespace {

struct CellPos {
    int i[3];     // lower corner
    double w[3];  // fractional position in the cell
};

CellPos locate(const GridSpec& g, const double x[3]) {
    CellPos c;
    for (int d = 0; d < 3; ++d) {
        double t = (x[d] - g.lo[d]) / g.step(d);
        int i = (int)std::floor(t);
        if (i < 0) i = 0;
        if (i > g.n[d] - 2) i = g.n[d] - 2;
        c.i[d] = i;
        c.w[d] = t - i;
    }
    return c;
}

}  // namespace

double GridField::interp(double log_k, double r, double y) const {
    const double x[3] = {log_k, r, y};
    if (!spec_.contains(x[0], x[1], x[2], 1e-9))
        throw SolveError("grid query outside the solved box");
    CellPos c = locate(spec_, x);
    double out = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int d = 0; d < 2; ++d) {
                double w = (a ? c.w[0] : 1 - c.w[0]) * (b ? c.w[1] : 1 - c.w[1]) *
                           (d ? c.w[2] : 1 - c.w[2]);
                out += w * at(c.i[0] + a, c.i[1] + b, c.i[2] + d);
            }
    return out;
}

namespace {

/// First derivative along one axis: central interior, 3-point one-sided at
/// the ends (second-order in both cases).
double d1(const std::vector<double>& v, const GridSpec& g, int i, int j, int k, int d) {
    const int idx[3] = {i, j, k};
    const double h = g.step(d);
    auto val = [&](int off) {
        int p[3] = {i, j, k};
        p[d] += off;
        return v[g.index(p[0], p[1], p[2])];
    };
    if (idx[d] == 0) return (-3.0 * val(0) + 4.0 * val(1) - val(2)) / (2.0 * h);
    if (idx[d] == g.n[d] - 1) return (3.0 * val(0) - 4.0 * val(-1) + val(-2)) / (2.0 * h);
    return (val(1) - val(-1)) / (2.0 * h);
}

/// Second derivative along one axis; at the boundary the adjacent interior
/// stencil is used (exact on quadratics).
double d2(const std::vector<double>& v, const GridSpec& g, int i, int j, int k, int d) {
    const int idx[3] = {i, j, k};
    const double h = g.step(d);
    auto val = [&](int off) {
        int p[3] = {i, j, k};
        p[d] += off;
        return v[g.index(p[0], p[1], p[2])];
    };
    int shift = 0;
    if (idx[d] == 0) shift = 1;
    if (idx[d] == g.n[d] - 1) shift = -1;
    return (val(shift + 1) - 2.0 * val(shift) + val(shift - 1)) / (h * h);
}

}  // namespace

ValueEval GridField::node_eval(int i, int j, int k) const {
    ValueEval e;
    e.has_kappa = false;
    e.v = at(i, j, k);
    e.v_k = d1(v_, spec_, i, j, k, 0);
    e.v_r = d1(v_, spec_, i, j, k, 1);
    e.v_y = d1(v_, spec_, i, j, k, 2);
    e.v_kk = d2(v_, spec_, i, j, k, 0);
    e.v_rr = d2(v_, spec_, i, j, k, 1);
    e.v_yy = d2(v_, spec_, i, j, k, 2);

    // cross term: difference the K-derivative along R (mixed central where possible)
    const double hr = spec_.step(1);
    if (j == 0) {
        e.v_kr = (-3.0 * d1(v_, spec_, i, 0, k, 0) + 4.0 * d1(v_, spec_, i, 1, k, 0) -
                  d1(v_, spec_, i, 2, k, 0)) /
                 (2.0 * hr);
    } else if (j == spec_.n[1] - 1) {
        e.v_kr = (3.0 * d1(v_, spec_, i, j, k, 0) - 4.0 * d1(v_, spec_, i, j - 1, k, 0) +
                  d1(v_, spec_, i, j - 2, k, 0)) /
                 (2.0 * hr);
    } else {
        e.v_kr = (d1(v_, spec_, i, j + 1, k, 0) - d1(v_, spec_, i, j - 1, k, 0)) / (2.0 * hr);
    }
    return e;
}

ValueEval GridField::derivatives_at(double log_k, double r, double y) const {
    const double x[3] = {log_k, r, y};
    if (!spec_.contains(x[0], x[1], x[2]))
        throw SolveError("derivative query outside the solved box");
    CellPos c = locate(spec_, x);

    ValueEval out;
    out.has_kappa = false;
    double acc[10] = {0};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int d = 0; d < 2; ++d) {
                double w = (a ? c.w[0] : 1 - c.w[0]) * (b ? c.w[1] : 1 - c.w[1]) *
                           (d ? c.w[2] : 1 - c.w[2]);
                if (w == 0.0) continue;
                ValueEval e = node_eval(c.i[0] + a, c.i[1] + b, c.i[2] + d);
                const double vals[10] = {e.v,  e.v_k,  e.v_r,  e.v_y,  e.v_x,
                                         e.v_kk, e.v_rr, e.v_yy, e.v_xx, e.v_kr};
                for (int q = 0; q < 10; ++q) acc[q] += w * vals[q];
            }
    out.v = acc[0];
    out.v_k = acc[1];
    out.v_r = acc[2];
    out.v_y = acc[3];
    out.v_x = acc[4];
    out.v_kk = acc[5];
    out.v_rr = acc[6];
    out.v_yy = acc[7];
    out.v_xx = acc[8];
    out.v_kr = acc[9];
    return out;
}

namespace {

JumpState parse_jump_tag(const std::string& tag) {
    if (tag == "preboth") return JumpState::pre_both();
    int m = -1, j = -1;
    if (std::sscanf(tag.c_str(), "postboth_m%d_j%d", &m, &j) == 2)
        return JumpState::post_both(m, j);
    if (std::sscanf(tag.c_str(), "posttech_j%d", &j) == 1) return JumpState::post_tech(j);
    if (std::sscanf(tag.c_str(), "postdamage_m%d", &m) == 1)
        return JumpState::post_damage(m);
    throw IoError("bad jump tag: " + tag);
}

}  // namespace

void GridField::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for write: " + path);
    os << "GRIDFIELD1\n";
    os << "jump=" << jump_.tag() << "\n";
    os << "param_hash=" << param_hash_ << "\n";
    os << "xi=" << xi_tag_ << "\n";
    os << "dims=log_k,r,y\n";
    os << "lo=" << fmt_g17(spec_.lo[0]) << "," << fmt_g17(spec_.lo[1]) << ","
       << fmt_g17(spec_.lo[2]) << "\n";
    os << "hi=" << fmt_g17(spec_.hi[0]) << "," << fmt_g17(spec_.hi[1]) << ","
       << fmt_g17(spec_.hi[2]) << "\n";
    os << "n=" << spec_.n[0] << "," << spec_.n[1] << "," << spec_.n[2] << "\n";
    os << "data\n";
    os.write(reinterpret_cast<const char*>(v_.data()),
             std::streamsize(v_.size() * sizeof(double)));
    if (!os) throw IoError("write failed: " + path);
}

GridField GridField::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for read: " + path);
    std::string line;
    if (!std::getline(is, line) || line != "GRIDFIELD1")
        throw IoError("not a grid field file: " + path);

    GridField f;
    auto need = [&](const char* key) {
        if (!std::getline(is, line)) throw IoError("truncated header: " + path);
        std::string prefix = std::string(key) + "=";
        if (line.rfind(prefix, 0) != 0)
            throw IoError("expected '" + prefix + "' in " + path);
        return line.substr(prefix.size());
    };
    f.jump_ = parse_jump_tag(need("jump"));
    f.param_hash_ = need("param_hash");
    f.xi_tag_ = need("xi");
    if (need("dims") != "log_k,r,y") throw IoError("unexpected dims in " + path);
    auto parse3 = [&](const std::string& s, auto& out) {
        std::istringstream ss(s);
        std::string tok;
        for (int d = 0; d < 3; ++d) {
            if (!std::getline(ss, tok, ',')) throw IoError("bad header triple in " + path);
            out[d] = std::stod(tok);
        }
    };
    parse3(need("lo"), f.spec_.lo);
    parse3(need("hi"), f.spec_.hi);
    std::array<double, 3> nn{};
    parse3(need("n"), nn);
    for (int d = 0; d < 3; ++d) f.spec_.n[d] = (int)nn[d];
    if (!std::getline(is, line) || line != "data") throw IoError("missing data marker");

    f.spec_.validate();
    f.v_.assign(f.spec_.total(), 0.0);
    is.read(reinterpret_cast<char*>(f.v_.data()),
            std::streamsize(f.v_.size() * sizeof(double)));
    if (is.gcount() != std::streamsize(f.v_.size() * sizeof(double)))
        throw IoError("truncated data: " + path);
    return f;
}

}  // namespace climhjb
