#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "twowell/energy.hpp"
#include "twowell/error.hpp"
#include "twowell/mat.hpp"
#include "twowell/parallel.hpp"

namespace twowell {

/// Discrete convex envelope (biconjugate) of an energy on the box
/// [-box, box]^4 of matrix entries, sampled at resolution points per axis
/// in the order (m11, m12, m21, m22), row-major.
struct GridEnvelope {
    double box = 3.0;
    int resolution = 33;
    std::vector<double> values;

    double step() const { return 2.0 * box / (resolution - 1); }

    std::size_t index(int i, int j, int k, int l) const {
        const std::size_t r = resolution;
        return ((static_cast<std::size_t>(i) * r + j) * r + k) * r + l;
    }

    double node_coord(int i) const { return -box + i * step(); }

    /// Grid node nearest to a coordinate.
    int nearest_node(double v) const {
        const int i = static_cast<int>(std::lround((v + box) / step()));
        return std::min(std::max(i, 0), resolution - 1);
    }
};

namespace detail {

/// Discrete Legendre transform of one line: out[j] = max_i (S[j] A[i] + v[i]).
/// Computed exactly via the upper convex hull of the points (A[i], v[i])
/// and a monotone two-pointer sweep, O(n + m) per line.
struct Conjugate1D {
    std::vector<int> hull;  // scratch

    void operator()(const std::vector<double>& A, const double* v, std::size_t stride_in,
                    const std::vector<double>& S, double* out, std::size_t stride_out) {
        const int n = static_cast<int>(A.size());
        hull.clear();
        auto val = [&](int i) { return v[static_cast<std::size_t>(i) * stride_in]; };
        for (int i = 0; i < n; ++i) {
            while (hull.size() >= 2) {
                const int a = hull[hull.size() - 2], b = hull.back();
                // pop b if it lies on or below segment a--i (counterclockwise turn)
                const double cross = (A[b] - A[a]) * (val(i) - val(a)) -
                                     (val(b) - val(a)) * (A[i] - A[a]);
                if (cross >= 0.0)
                    hull.pop_back();
                else
                    break;
            }
            hull.push_back(i);
        }
        const int m = static_cast<int>(hull.size());
        int k = 0;
        for (std::size_t j = 0; j < S.size(); ++j) {
            const double s = S[j];
            while (k + 1 < m &&
                   s * A[hull[k + 1]] + val(hull[k + 1]) >= s * A[hull[k]] + val(hull[k]))
                ++k;
            out[j * stride_out] = s * A[hull[k]] + val(hull[k]);
        }
    }
};

struct Table4 {
    std::array<int, 4> dims{};
    std::vector<double> v;

    std::array<std::size_t, 4> strides() const {
        std::array<std::size_t, 4> s{};
        s[3] = 1;
        for (int a = 2; a >= 0; --a) s[a] = s[a + 1] * dims[a + 1];
        return s;
    }
    std::size_t size() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2] * dims[3];
    }
};

/// One conjugate pass along `axis`, mapping abscissae A -> S.
inline Table4 conjugate_axis(const Table4& in, int axis, const std::vector<double>& A,
                             const std::vector<double>& S) {
    Table4 out;
    out.dims = in.dims;
    out.dims[axis] = static_cast<int>(S.size());
    out.v.resize(out.size());

    const auto sin_ = in.strides();
    const auto sout = out.strides();
    std::array<int, 3> other{};
    int no = 0;
    for (int a = 0; a < 4; ++a)
        if (a != axis) other[no++] = a;
    const std::size_t nlines = static_cast<std::size_t>(in.dims[other[0]]) * in.dims[other[1]] *
                               in.dims[other[2]];

    parallel_for_blocks(nlines, [&](std::size_t lo, std::size_t hi, int) {
        Conjugate1D conj;
        for (std::size_t line = lo; line < hi; ++line) {
            std::size_t rem = line, base_in = 0, base_out = 0;
            for (int t = 2; t >= 0; --t) {
                const std::size_t c = rem % in.dims[other[t]];
                rem /= in.dims[other[t]];
                base_in += c * sin_[other[t]];
                base_out += c * sout[other[t]];
            }
            conj(A, in.v.data() + base_in, sin_[axis], S, out.v.data() + base_out, sout[axis]);
        }
    });
    return out;
}

inline void negate(Table4& t) {
    for (double& x : t.v) x = -x;
}

/// Slope grid: the node grid itself (so convex sampled data is a fixed
/// point of the double transform) extended by a coarser tail out to
/// 2.5 * box, which covers the supporting slopes of envelope queries in
/// the inner half-box.
inline std::vector<double> slope_grid(const std::vector<double>& nodes, double box) {
    const double dx = nodes[1] - nodes[0];
    std::vector<double> tail;
    for (double s = box + 2.0 * dx; s <= 2.5 * box + 1e-12; s += 2.0 * dx) tail.push_back(s);
    std::vector<double> S;
    for (auto it = tail.rbegin(); it != tail.rend(); ++it) S.push_back(-*it);
    S.insert(S.end(), nodes.begin(), nodes.end());
    S.insert(S.end(), tail.begin(), tail.end());
    return S;
}

}  // namespace detail

/// Double discrete Legendre-Fenchel transform of a sampled table:
/// the convex envelope of the node data, restricted to the slope grid.
/// Values never exceed the input at any node and are convex along every
/// axis line.
inline std::vector<double> biconjugate_values(std::vector<double> f, double box, int resolution) {
    std::vector<double> X(resolution);
    for (int i = 0; i < resolution; ++i) X[i] = -box + i * (2.0 * box / (resolution - 1));
    const std::vector<double> S = detail::slope_grid(X, box);

    detail::Table4 t;
    t.dims = {resolution, resolution, resolution, resolution};
    t.v = std::move(f);
    detail::negate(t);                                        // -f
    for (int a = 0; a < 4; ++a) t = detail::conjugate_axis(t, a, X, S);  // f*
    detail::negate(t);                                        // -f*
    for (int a = 0; a < 4; ++a) t = detail::conjugate_axis(t, a, S, X);  // f**
    return std::move(t.v);
}

/// Sample `raw` on the grid and convexify. The transform is exact for the
/// restriction to the box; near the boundary the truncated domain lowers
/// the envelope, so queries should stay in the inner half-box.
inline GridEnvelope build_biconjugate(const EnergyModel& raw, double box = 3.0,
                                      int resolution = 33) {
    if (resolution < 9 || resolution % 2 == 0)
        throw config_error("build_biconjugate: resolution must be odd and >= 9");
    if (box < 3.0) throw config_error("build_biconjugate: box must be >= 3");

    GridEnvelope env;
    env.box = box;
    env.resolution = resolution;
    const std::size_t r = resolution;
    std::vector<double> f(r * r * r * r);
    const double dx = env.step();
    parallel_for_blocks(r * r, [&](std::size_t lo, std::size_t hi, int) {
        for (std::size_t ij = lo; ij < hi; ++ij) {
            const int i = static_cast<int>(ij / r), j = static_cast<int>(ij % r);
            const double m11 = -box + i * dx, m12 = -box + j * dx;
            std::size_t idx = ij * r * r;
            for (int k = 0; k < resolution; ++k)
                for (int l = 0; l < resolution; ++l)
                    f[idx++] = raw.eval({m11, m12, -box + k * dx, -box + l * dx});
        }
    });
    env.values = biconjugate_values(std::move(f), box, resolution);
    return env;
}

/// Multilinear interpolation of the 16 surrounding nodes.
inline double envelope_eval(const GridEnvelope& env, const Mat2& m) {
    const double entries[4] = {m.m11, m.m12, m.m21, m.m22};
    int base[4];
    double frac[4];
    const double dx = env.step();
    for (int a = 0; a < 4; ++a) {
        if (std::abs(entries[a]) > env.box + 1e-12)
            throw numeric_error("envelope_eval: point outside the sampled box, refusing to extrapolate");
        double u = (entries[a] + env.box) / dx;
        int i = static_cast<int>(std::floor(u));
        i = std::min(std::max(i, 0), env.resolution - 2);
        base[a] = i;
        frac[a] = std::min(std::max(u - i, 0.0), 1.0);
    }
    double acc = 0.0;
    for (int c = 0; c < 16; ++c) {
        double w = 1.0;
        int idx[4];
        for (int a = 0; a < 4; ++a) {
            const int bit = (c >> a) & 1;
            idx[a] = base[a] + bit;
            w *= bit ? frac[a] : 1.0 - frac[a];
        }
        if (w != 0.0) acc += w * env.values[env.index(idx[0], idx[1], idx[2], idx[3])];
    }
    return acc;
}

/// Binary format: magic "TWELL1", u32 resolution, f64 box, then
/// resolution^4 doubles in row-major axis order. Little-endian host assumed.
inline void save_envelope(const GridEnvelope& env, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("save_envelope: cannot open " + path);
    out.write("TWELL1", 6);
    const std::uint32_t res = static_cast<std::uint32_t>(env.resolution);
    out.write(reinterpret_cast<const char*>(&res), sizeof res);
    out.write(reinterpret_cast<const char*>(&env.box), sizeof env.box);
    out.write(reinterpret_cast<const char*>(env.values.data()),
              static_cast<std::streamsize>(env.values.size() * sizeof(double)));
    if (!out) throw config_error("save_envelope: write failed for " + path);
}

inline GridEnvelope load_envelope(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("load_envelope: cannot open " + path);
    char magic[6];
    in.read(magic, 6);
    if (!in || std::memcmp(magic, "TWELL1", 6) != 0)
        throw config_error("load_envelope: bad magic, not an envelope file");
    std::uint32_t res = 0;
    GridEnvelope env;
    in.read(reinterpret_cast<char*>(&res), sizeof res);
    in.read(reinterpret_cast<char*>(&env.box), sizeof env.box);
    if (!in || res < 2 || res > 4096) throw config_error("load_envelope: corrupt header");
    env.resolution = static_cast<int>(res);
    const std::size_t n = static_cast<std::size_t>(res) * res * res * res;
    env.values.resize(n);
    in.read(reinterpret_cast<char*>(env.values.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw config_error("load_envelope: truncated value table");
    return env;
}

}  // namespace twowell
