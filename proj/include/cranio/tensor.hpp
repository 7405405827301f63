#ifndef CRANIO_TENSOR_HPP
#define CRANIO_TENSOR_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cranio/errors.hpp"
#include "cranio/parallel.hpp"

// Reverse-mode differentiation on dense (N,C,D,H,W) tensors. Templated on
// the scalar type: float for training, double for finite-difference checks.
namespace cranio::nn {

struct Shape {
    int n = 1, c = 1, d = 1, h = 1, w = 1;
    std::size_t numel() const {
        return static_cast<std::size_t>(n) * c * static_cast<std::size_t>(d) * h * w;
    }
    std::size_t spatial() const { return static_cast<std::size_t>(d) * h * w; }
    bool operator==(const Shape&) const = default;
    std::string str() const {
        return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(d) + "," +
               std::to_string(h) + "," + std::to_string(w) + ")";
    }
};

// Named trainable tensor living outside the tape.
template <typename T>
struct Param {
    std::string name;
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;
    std::vector<T> adam_m, adam_v;

    void init_zero(const std::string& nm, Shape s) {
        name = nm;
        shape = s;
        value.assign(s.numel(), T(0));
        grad.assign(s.numel(), T(0));
        adam_m.assign(s.numel(), T(0));
        adam_v.assign(s.numel(), T(0));
    }
};

struct Var {
    int id = -1;
};

template <typename T>
class Tape {
public:
    struct Node {
        Shape shape;
        std::vector<T> value;
        std::vector<T> grad;
        std::function<void()> backward; // empty for leaves
        int param = -1;                 // index into the bound param list
    };

    std::vector<Node> nodes;
    std::vector<Param<T>>* params = nullptr; // bound parameter storage
    bool recording = true;

    void clear() { nodes.clear(); }

    Node& at(Var v) { return nodes[static_cast<std::size_t>(v.id)]; }
    const Node& at(Var v) const { return nodes[static_cast<std::size_t>(v.id)]; }
    const std::vector<T>& value(Var v) const { return at(v).value; }
    Shape shape(Var v) const { return at(v).shape; }

    Var constant(Shape s, std::vector<T> data) {
        if (data.size() != s.numel()) throw ShapeMismatch("tensor payload size " + s.str());
        Node node;
        node.shape = s;
        node.value = std::move(data);
        nodes.push_back(std::move(node));
        return {static_cast<int>(nodes.size()) - 1};
    }

    Var leaf(int param_index) {
        Param<T>& p = (*params)[static_cast<std::size_t>(param_index)];
        Node node;
        node.shape = p.shape;
        node.value = p.value;
        node.param = param_index;
        nodes.push_back(std::move(node));
        return {static_cast<int>(nodes.size()) - 1};
    }

    // Seeds d(loss) = 1 and sweeps the graph in reverse creation order;
    // parameter gradients accumulate into Param::grad.
    void backward(Var loss) {
        if (at(loss).shape.numel() != 1)
            throw ShapeMismatch("backward expects a scalar loss");
        for (auto& node : nodes) node.grad.assign(node.value.size(), T(0));
        at(loss).grad[0] = T(1);
        for (std::size_t i = nodes.size(); i-- > 0;) {
            if (nodes[i].backward) nodes[i].backward();
        }
        if (params) {
            for (auto& node : nodes) {
                if (node.param < 0) continue;
                auto& p = (*params)[static_cast<std::size_t>(node.param)];
                for (std::size_t q = 0; q < node.grad.size(); ++q) p.grad[q] += node.grad[q];
            }
        }
    }

    // ---- ops ----

    Var conv3d(Var x, Var w, Var b, int stride = 1);
    Var group_norm(Var x, Var gamma, Var beta, int groups, T eps = T(1e-5));
    Var leaky_relu(Var x, T slope = T(0.01));
    Var sigmoid(Var x);
    Var add(Var a, Var b);
    Var concat_channels(Var a, Var b);
    Var slice_channels(Var x, int c0, int c1);
    Var upsample2x(Var x);
    Var linear(Var x, Var w, Var b); // x (N,F) -> (N,G)
    Var reshape(Var x, Shape s);
    // 1 - 2*sum(a*b)/(sum(a)+sum(b)+alpha), averaged over (n,c) pairs;
    // differentiable in both operands
    Var soft_dice(Var a, Var b, T alpha);
    // batch mean of -0.5 * sum_l (1 + logvar - mu^2 - exp(logvar))
    Var kl_divergence(Var mu, Var logvar);
    // mu + exp(0.5*logvar) * eps
    Var reparameterize(Var mu, Var logvar, Var eps);
    Var axpby(Var a, T sa, Var b, T sb); // scalar combine, elementwise
};

// ---------------------------------------------------------------------------

template <typename T>
Var Tape<T>::conv3d(Var xv, Var wv, Var bv, int stride) {
    const Node& xn = at(xv);
    const Node& wn = at(wv);
    const Node& bn = at(bv);
    const Shape xs = xn.shape, ws = wn.shape;
    // weights stored as (Cout, Cin, k, k, k)
    const int k = ws.d;
    if (ws.h != k || ws.w != k || (k != 1 && k != 3))
        throw ShapeMismatch("conv3d kernel must be 1^3 or 3^3");
    if (ws.c != xs.c) throw ShapeMismatch("conv3d channels: " + ws.str() + " vs " + xs.str());
    if (bn.shape.numel() != static_cast<std::size_t>(ws.n))
        throw ShapeMismatch("conv3d bias size");
    const int pad = k / 2;

    Shape os;
    os.n = xs.n;
    os.c = ws.n;
    os.d = (xs.d + 2 * pad - k) / stride + 1;
    os.h = (xs.h + 2 * pad - k) / stride + 1;
    os.w = (xs.w + 2 * pad - k) / stride + 1;

    Node out;
    out.shape = os;
    out.value.assign(os.numel(), T(0));

    const T* X = xn.value.data();
    const T* W = wn.value.data();
    const T* B = bn.value.data();
    T* O = out.value.data();

    const std::size_t x_cs = xs.spatial();
    const std::size_t x_ns = x_cs * static_cast<std::size_t>(xs.c);
    const std::size_t o_cs = os.spatial();
    const std::size_t o_ns = o_cs * static_cast<std::size_t>(os.c);
    const std::size_t w_cs = static_cast<std::size_t>(k) * k * k;
    const std::size_t w_os = w_cs * static_cast<std::size_t>(ws.c);

    auto run_out_channel = [&](int n, int co) {
        T* o_base = O + n * o_ns + static_cast<std::size_t>(co) * o_cs;
        const T* w_base = W + static_cast<std::size_t>(co) * w_os;
        T bias = B[co];
        for (std::size_t q = 0; q < o_cs; ++q) o_base[q] = bias;
        for (int ci = 0; ci < xs.c; ++ci) {
            const T* x_base = X + n * x_ns + static_cast<std::size_t>(ci) * x_cs;
            const T* w_ci = w_base + static_cast<std::size_t>(ci) * w_cs;
            for (int dz = 0; dz < k; ++dz)
                for (int dy = 0; dy < k; ++dy)
                    for (int dx = 0; dx < k; ++dx) {
                        T wgt = w_ci[(dz * k + dy) * k + dx];
                        if (wgt == T(0)) continue;
                        for (int oz = 0; oz < os.d; ++oz) {
                            int iz = oz * stride - pad + dz;
                            if (iz < 0 || iz >= xs.d) continue;
                            for (int oy = 0; oy < os.h; ++oy) {
                                int iy = oy * stride - pad + dy;
                                if (iy < 0 || iy >= xs.h) continue;
                                T* orow = o_base + (static_cast<std::size_t>(oz) * os.h + oy) * os.w;
                                const T* xrow =
                                    x_base + (static_cast<std::size_t>(iz) * xs.h + iy) * xs.w;
                                int ox0 = 0, ox1 = os.w;
                                // clip so ix = ox*stride - pad + dx stays valid
                                while (ox0 < os.w && ox0 * stride - pad + dx < 0) ++ox0;
                                while (ox1 > ox0 && (ox1 - 1) * stride - pad + dx >= xs.w) --ox1;
                                const T* xoff = xrow - pad + dx;
                                if (stride == 1) {
                                    for (int ox = ox0; ox < ox1; ++ox)
                                        orow[ox] += wgt * xoff[ox];
                                } else {
                                    for (int ox = ox0; ox < ox1; ++ox)
                                        orow[ox] += wgt * xrow[ox * stride - pad + dx];
                                }
                            }
                        }
                    }
        }
    };

    parallel_for(static_cast<std::int64_t>(os.n) * os.c, [&](std::int64_t t) {
        run_out_channel(static_cast<int>(t / os.c), static_cast<int>(t % os.c));
    });

    nodes.push_back(std::move(out));
    Var ov{static_cast<int>(nodes.size()) - 1};

    if (recording) {
        Tape* tape = this;
        int xi = xv.id, wi = wv.id, bi = bv.id, oi = ov.id;
        int s = stride;
        at(ov).backward = [tape, xi, wi, bi, oi, s, k, pad]() {
            Node& xn2 = tape->nodes[static_cast<std::size_t>(xi)];
            Node& wn2 = tape->nodes[static_cast<std::size_t>(wi)];
            Node& bn2 = tape->nodes[static_cast<std::size_t>(bi)];
            Node& on2 = tape->nodes[static_cast<std::size_t>(oi)];
            const Shape xs2 = xn2.shape, ws2 = wn2.shape, os2 = on2.shape;
            const T* X = xn2.value.data();
            const T* W = wn2.value.data();
            const T* GO = on2.grad.data();
            T* GX = xn2.grad.data();
            T* GW = wn2.grad.data();
            T* GB = bn2.grad.data();

            const std::size_t x_cs = xs2.spatial();
            const std::size_t x_ns = x_cs * static_cast<std::size_t>(xs2.c);
            const std::size_t o_cs = os2.spatial();
            const std::size_t o_ns = o_cs * static_cast<std::size_t>(os2.c);
            const std::size_t w_cs = static_cast<std::size_t>(k) * k * k;
            const std::size_t w_os = w_cs * static_cast<std::size_t>(ws2.c);

            // bias + weight gradients, parallel over output channels
            parallel_for(ws2.n, [&](std::int64_t co) {
                T* gw_base = GW + static_cast<std::size_t>(co) * w_os;
                T gb = T(0);
                for (int n = 0; n < os2.n; ++n) {
                    const T* go_base = GO + n * o_ns + static_cast<std::size_t>(co) * o_cs;
                    for (std::size_t q = 0; q < o_cs; ++q) gb += go_base[q];
                    for (int ci = 0; ci < xs2.c; ++ci) {
                        const T* x_base = X + n * x_ns + static_cast<std::size_t>(ci) * x_cs;
                        T* gw_ci = gw_base + static_cast<std::size_t>(ci) * w_cs;
                        for (int dz = 0; dz < k; ++dz)
                            for (int dy = 0; dy < k; ++dy)
                                for (int dx = 0; dx < k; ++dx) {
                                    T acc = T(0);
                                    for (int oz = 0; oz < os2.d; ++oz) {
                                        int iz = oz * s - pad + dz;
                                        if (iz < 0 || iz >= xs2.d) continue;
                                        for (int oy = 0; oy < os2.h; ++oy) {
                                            int iy = oy * s - pad + dy;
                                            if (iy < 0 || iy >= xs2.h) continue;
                                            const T* gorow =
                                                go_base +
                                                (static_cast<std::size_t>(oz) * os2.h + oy) * os2.w;
                                            const T* xrow =
                                                x_base +
                                                (static_cast<std::size_t>(iz) * xs2.h + iy) * xs2.w;
                                            for (int ox = 0; ox < os2.w; ++ox) {
                                                int ix = ox * s - pad + dx;
                                                if (ix < 0 || ix >= xs2.w) continue;
                                                acc += gorow[ox] * xrow[ix];
                                            }
                                        }
                                    }
                                    gw_ci[(dz * k + dy) * k + dx] += acc;
                                }
                    }
                }
                GB[co] += gb;
            });

            // input gradient, parallel over input channels
            parallel_for(static_cast<std::int64_t>(xs2.n) * xs2.c, [&](std::int64_t t) {
                int n = static_cast<int>(t / xs2.c);
                int ci = static_cast<int>(t % xs2.c);
                T* gx_base = GX + n * x_ns + static_cast<std::size_t>(ci) * x_cs;
                for (int co = 0; co < ws2.n; ++co) {
                    const T* go_base = GO + n * o_ns + static_cast<std::size_t>(co) * o_cs;
                    const T* w_ci = W + static_cast<std::size_t>(co) * w_os +
                                    static_cast<std::size_t>(ci) * w_cs;
                    for (int dz = 0; dz < k; ++dz)
                        for (int dy = 0; dy < k; ++dy)
                            for (int dx = 0; dx < k; ++dx) {
                                T wgt = w_ci[(dz * k + dy) * k + dx];
                                if (wgt == T(0)) continue;
                                for (int oz = 0; oz < os2.d; ++oz) {
                                    int iz = oz * s - pad + dz;
                                    if (iz < 0 || iz >= xs2.d) continue;
                                    for (int oy = 0; oy < os2.h; ++oy) {
                                        int iy = oy * s - pad + dy;
                                        if (iy < 0 || iy >= xs2.h) continue;
                                        const T* gorow =
                                            go_base +
                                            (static_cast<std::size_t>(oz) * os2.h + oy) * os2.w;
                                        T* gxrow = gx_base +
                                                   (static_cast<std::size_t>(iz) * xs2.h + iy) *
                                                       xs2.w;
                                        for (int ox = 0; ox < os2.w; ++ox) {
                                            int ix = ox * s - pad + dx;
                                            if (ix < 0 || ix >= xs2.w) continue;
                                            gxrow[ix] += wgt * gorow[ox];
                                        }
                                    }
                                }
                            }
                }
            });
        };
    }
    return ov;
}

template <typename T>
Var Tape<T>::group_norm(Var xv, Var gv, Var bv, int groups, T eps) {
    const Node& xn = at(xv);
    Shape s = xn.shape;
    if (s.c % groups != 0) throw ShapeMismatch("group_norm: channels not divisible by groups");
    if (at(gv).shape.numel() != static_cast<std::size_t>(s.c) ||
        at(bv).shape.numel() != static_cast<std::size_t>(s.c))
        throw ShapeMismatch("group_norm affine size");

    const int cpg = s.c / groups;
    const std::size_t sp = s.spatial();
    const std::size_t group_elems = static_cast<std::size_t>(cpg) * sp;

    Node out;
    out.shape = s;
    out.value.assign(s.numel(), T(0));

    std::vector<T> mean(static_cast<std::size_t>(s.n) * groups);
    std::vector<T> inv_std(static_cast<std::size_t>(s.n) * groups);

    const T* X = xn.value.data();
    const T* G = at(gv).value.data();
    const T* B = at(bv).value.data();
    T* O = out.value.data();

    for (int n = 0; n < s.n; ++n)
        for (int g = 0; g < groups; ++g) {
            const T* base = X + (static_cast<std::size_t>(n) * s.c + g * cpg) * sp;
            T mu = T(0);
            for (std::size_t q = 0; q < group_elems; ++q) mu += base[q];
            mu /= static_cast<T>(group_elems);
            T var = T(0);
            for (std::size_t q = 0; q < group_elems; ++q) {
                T d = base[q] - mu;
                var += d * d;
            }
            var /= static_cast<T>(group_elems);
            T is = T(1) / std::sqrt(var + eps);
            mean[static_cast<std::size_t>(n) * groups + g] = mu;
            inv_std[static_cast<std::size_t>(n) * groups + g] = is;
            for (int c = 0; c < cpg; ++c) {
                int ch = g * cpg + c;
                const T* xc = X + (static_cast<std::size_t>(n) * s.c + ch) * sp;
                T* oc = O + (static_cast<std::size_t>(n) * s.c + ch) * sp;
                T gamma = G[ch], beta = B[ch];
                for (std::size_t q = 0; q < sp; ++q) oc[q] = gamma * (xc[q] - mu) * is + beta;
            }
        }

    nodes.push_back(std::move(out));
    Var ov{static_cast<int>(nodes.size()) - 1};

    if (recording) {
        Tape* tape = this;
        int xi = xv.id, gi = gv.id, bi = bv.id, oi = ov.id;
        auto mu_v = std::move(mean);
        auto is_v = std::move(inv_std);
        at(ov).backward = [tape, xi, gi, bi, oi, groups, cpg, mu_v, is_v]() {
            Node& xn2 = tape->nodes[static_cast<std::size_t>(xi)];
            Node& gn2 = tape->nodes[static_cast<std::size_t>(gi)];
            Node& bn2 = tape->nodes[static_cast<std::size_t>(bi)];
            Node& on2 = tape->nodes[static_cast<std::size_t>(oi)];
            Shape s2 = xn2.shape;
            const std::size_t sp = s2.spatial();
            const std::size_t group_elems = static_cast<std::size_t>(cpg) * sp;
            const T* X = xn2.value.data();
            const T* G = gn2.value.data();
            const T* GO = on2.grad.data();
            T* GX = xn2.grad.data();
            T* GG = gn2.grad.data();
            T* GB = bn2.grad.data();

            for (int n = 0; n < s2.n; ++n)
                for (int g = 0; g < groups; ++g) {
                    T mu = mu_v[static_cast<std::size_t>(n) * groups + g];
                    T is = is_v[static_cast<std::size_t>(n) * groups + g];
                    // accumulate the two reductions over the group
                    T sum_gg = T(0), sum_ggx = T(0);
                    for (int c = 0; c < cpg; ++c) {
                        int ch = g * cpg + c;
                        const T* xc = X + (static_cast<std::size_t>(n) * s2.c + ch) * sp;
                        const T* goc = GO + (static_cast<std::size_t>(n) * s2.c + ch) * sp;
                        T gamma = G[ch];
                        for (std::size_t q = 0; q < sp; ++q) {
                            T xhat = (xc[q] - mu) * is;
                            T gg = goc[q] * gamma;
                            sum_gg += gg;
                            sum_ggx += gg * xhat;
                        }
                    }
                    T inv_m = T(1) / static_cast<T>(group_elems);
                    for (int c = 0; c < cpg; ++c) {
                        int ch = g * cpg + c;
                        const T* xc = X + (static_cast<std::size_t>(n) * s2.c + ch) * sp;
                        const T* goc = GO + (static_cast<std::size_t>(n) * s2.c + ch) * sp;
                        T* gxc = GX + (static_cast<std::size_t>(n) * s2.c + ch) * sp;
                        T gamma = G[ch];
                        T gg_acc = T(0), gb_acc = T(0);
                        for (std::size_t q = 0; q < sp; ++q) {
                            T xhat = (xc[q] - mu) * is;
                            T gg = goc[q] * gamma;
                            gxc[q] += is * (gg - inv_m * sum_gg - xhat * inv_m * sum_ggx);
                            gg_acc += goc[q] * xhat;
                            gb_acc += goc[q];
                        }
                        GG[ch] += gg_acc;
                        GB[ch] += gb_acc;
                    }
                }
        };
    }
    return ov;
}

template <typename T>
Var Tape<T>::leaky_relu(Var xv, T slope) {
    const Node& xn = at(xv);
    Node out;
    out.shape = xn.shape;
    out.value.resize(xn.value.size());
    for (std::size_t q = 0; q < xn.value.size(); ++q)
        out.value[q] = xn.value[q] > T(0) ? xn.value[q] : slope * xn.value[q];
    nodes.push_back(std::move(out));
    Var ov{static_cast<int>(nodes.size()) - 1};
    if (recording) {
        Tape* tape = this;
        int xi = xv.id, oi = ov.id;
        at(ov).backward = [tape, xi, oi, slope]() {
            Node& xn2 = tape->nodes[static_cast<std::size_t>(xi)];
            Node& on2 = tape->nodes[static_cast<std::size_t>(oi)];
            for (std::size_t q = 0; q < xn2.value.size(); ++q)
                xn2.grad[q] += on2.grad[q] * (xn2.value[q] > T(0) ? T(1) : slope);
        };
    }
    return ov;
}

template <typename T>
Var Tape<T>::sigmoid(Var xv) {
    const Node& xn = at(xv);
    Node out;
    out.shape = xn.shape;
    out.value.resize(xn.value.size());
    for (std::size_t q = 0; q < xn.value.size(); ++q)
        out.value[q] = T(1) / (T(1) + std::exp(-xn.value[q]));
    nodes.push_back(std::move(out));
    Var ov{static_cast<int>(nodes.size()) - 1};
    if (recording) {
        Tape* tape = this;
        int xi = xv.id, oi = ov.id;
        at(ov).backward = [tape, xi, oi]() {
            Node& xn2 = tape->nodes[static_cast<std::size_t>(xi)];
            Node& on2 = tape->nodes[static_cast<std::size_t>(oi)];
            for (std::size_t q = 0; q < xn2.value.size(); ++q) {
                T y = on2.value[q];
                xn2.grad[q] += on2.grad[q] * y * (T(1) - y);
            }
        };
    }
    return ov;
}

template <typename T>
Var Tape<T>::add(Var av, Var bv) {
    const Node& an = at(av);
    const Node& bn = at(bv);
    if (!(an.shape == bn.shape)) throw ShapeMismatch("add: " + an.shape.str() + " vs " + bn.shape.str());
    Node out;
    out.shape = an.shape;
    out.value.resize(an.value.size());
    for (std::size_t q = 0; q < an.value.size(); ++q) out.value[q] = an.value[q] + bn.value[q];
    nodes.push_back(std::move(out));
    Var ov{static_cast<int>(nodes.size()) - 1};
    if (recording) {
        Tape* tape = this;
        int ai = av.id, bi = bv.id, oi = ov.id;
        at(ov).backward = [tape, ai, bi, oi]() {
            Node& an2 = tape->nodes[static_cast<std::size_t>(ai)];
            Node& bn2 = tape->nodes[static_cast<std::size_t>(bi)];
            Node& on2 = tape->nodes[static_cast<std::size_t>(oi)];
            for (std::size_t q = 0; q < on2.grad.size(); ++q) {
                an2.grad[q] += on2.grad[q];
                bn2.grad[q] += on2.grad[q];
            }
        };
    }
    return ov;
}

template <typename T>
Var Tape<T>::concat_channels(Var av, Var bv) {
    const Node& an = at(av);
    const Node& bn = at(bv);
    Shape as = an.shape, bs = bn.shape;
    if (as.n != bs.n || as.d != bs.d || as.h != bs.h || as.w != bs.w)
        throw ShapeMismatch("concat: " + as.str() + " vs " + bs.str());
    Shape os = as;
    os.c = as.c + bs.c;
    Node out;
    out.shape = os;
    out.value.resize(os.numel());
    const std::size_t sp = as.spatial();
    for (int n = 0; n < os.n; ++n) {
        T* dst = out.value.data() + static_cast<std::size_t>(n) * os.c * sp;
        const T* pa = an.value.data() + static_cast<std::size_t>(n) * as.c * sp;
        const T* pb = bn.value.data() + static_cast<std::size_t>(n) * bs.c * sp;
        std::copy(pa, pa + static_cast<std::size_t>(as.c) * sp, dst);
        std::copy(pb, pb + static_cast<std::size_t>(bs.c) * sp,
                  dst + static_cast<std::size_t>(as.c) * sp);
    }
    nodes.push_back(std::move(out));
    Var ov{static_cast<int>(nodes.size()) - 1};
    if (recording) {
        Tape* tape = this;
        int ai = av.id, bi = bv.id, oi = ov.id;
        at(ov).backward = [tape, ai, bi, oi]() {
            Node& an2 = tape->nodes[static_cast<std::size_t>(ai)];
            Node& bn2 = tape->nodes[static_cast<std::size_t>(bi)];
            Node& on2 = tape->nodes[static_cast<std::size_t>(oi)];
            Shape as2 = an2.shape, bs2 = bn2.shape, os2 = on2.shape;
            const std::size_t sp = as2.spatial();
            for (int n = 0; n < os2.n; ++n) {
                const T* g = on2.grad.data() + static_cast<std::size_t>(n) * os2.c * sp;
                T* ga = an2.grad.data() + static_cast<std::size_t>(n) * as2.c * sp;
                T* gb = bn2.grad.data() + static_cast<std::size_t>(n) * bs2.c * sp;
                for (std::size_t q = 0; q < static_cast<std::size_t>(as2.c) * sp; ++q)
                    ga[q] += g[q];
                for (std::size_t q = 0; q < static_cast<std::size_t>(bs2.c) * sp; ++q)
                    gb[q] += g[static_cast<std::size_t>(as2.c) * sp + q];
            }
        };
    }
    return ov;
}

template <typename T>
Var Tape<T>::slice_channels(Var xv, int c0, int c1) {
    const Node& xn = at(xv);
    Shape xs = xn.shape;
    if (c0 < 0 || c1 <= c0 || c1 > xs.c) throw ShapeMismatch("slice_channels range");
    Shape os = xs;
    os.c = c1 - c0;
    Node out;
    out.shape = os;
    out.value.resize(os.numel());
    const std::size_t sp = xs.spatial();
    for (int n = 0; n < xs.n; ++n)
        std::copy(xn.value.data() + (static_cast<std::size_t>(n) * xs.c + c0) * sp,
                  xn.value.data() + (static_cast<std::size_t>(n) * xs.c + c1) * sp,
                  out.value.data() + static_cast<std::size_t>(n) * os.c * sp);
    nodes.push_back(std::move(out));
    Var ov{static_cast<int>(nodes.size()) - 1};
    if (recording) {
        Tape* tape = this;
        int xi = xv.id, oi = ov.id;
        at(ov).backward = [tape, xi, oi, c0]() {
            Node& xn2 = tape->nodes[static_cast<std::size_t>(xi)];
            Node& on2 = tape->nodes[static_cast<std::size_t>(oi)];
            Shape xs2 = xn2.shape, os2 = on2.shape;
            const std::size_t sp = xs2.spatial();
            for (int n = 0; n < xs2.n; ++n) {
                const T* g = on2.grad.data() + static_cast<std::size_t>(n) * os2.c * sp;
                T* gx = xn2.grad.data() + (static_cast<std::size_t>(n) * xs2.c + c0) * sp;
                for (std::size_t q = 0; q < static_cast<std::size_t>(os2.c) * sp; ++q)
                    gx[q] += g[q];
            }
        };
    }
    return ov;
}

namespace detail {

// per-axis interpolation taps for x2 upsampling, align_corners = false
struct UpTap {
    int i0, i1;
    double w0, w1;
};

inline std::vector<UpTap> up_taps(int out_size, int in_size) {
    std::vector<UpTap> taps(static_cast<std::size_t>(out_size));
    for (int o = 0; o < out_size; ++o) {
        double src = 0.5 * o - 0.25;
        int i0 = static_cast<int>(std::floor(src));
        double f = src - i0;
        int i1 = i0 + 1;
        if (i0 < 0) i0 = 0;
        if (i1 > in_size - 1) i1 = in_size - 1;
        taps[static_cast<std::size_t>(o)] = {i0, i1, 1.0 - f, f};
    }
    return taps;
}

} // namespace detail

// trilinear x2, align_corners = false: out(o) samples in((o + 0.5)/2 - 0.5)
template <typename T>
Var Tape<T>::upsample2x(Var xv) {
    const Node& xn = at(xv);
    Shape xs = xn.shape;
    Shape os = xs;
    os.d = xs.d * 2;
    os.h = xs.h * 2;
    os.w = xs.w * 2;

    auto tz = detail::up_taps(os.d, xs.d);
    auto ty = detail::up_taps(os.h, xs.h);
    auto tx = detail::up_taps(os.w, xs.w);

    Node out;
    out.shape = os;
    out.value.assign(os.numel(), T(0));
    const std::size_t xsp = xs.spatial(), osp = os.spatial();

    for (int n = 0; n < xs.n; ++n)
        for (int c = 0; c < xs.c; ++c) {
            const T* src = xn.value.data() + (static_cast<std::size_t>(n) * xs.c + c) * xsp;
            T* dst = out.value.data() + (static_cast<std::size_t>(n) * os.c + c) * osp;
            std::size_t q = 0;
            for (int oz = 0; oz < os.d; ++oz) {
                const auto& az = tz[static_cast<std::size_t>(oz)];
                for (int oy = 0; oy < os.h; ++oy) {
                    const auto& ay = ty[static_cast<std::size_t>(oy)];
                    for (int ox = 0; ox < os.w; ++ox, ++q) {
                        const auto& ax = tx[static_cast<std::size_t>(ox)];
                        T acc = T(0);
                        for (int bz = 0; bz < 2; ++bz) {
                            int iz = bz ? az.i1 : az.i0;
                            double wz = bz ? az.w1 : az.w0;
                            if (wz == 0.0) continue;
                            for (int by = 0; by < 2; ++by) {
                                int iy = by ? ay.i1 : ay.i0;
                                double wy = by ? ay.w1 : ay.w0;
                                if (wy == 0.0) continue;
                                const T* row =
                                    src + (static_cast<std::size_t>(iz) * xs.h + iy) * xs.w;
                                acc += static_cast<T>(wz * wy *
                                                      (ax.w0 * row[ax.i0] + ax.w1 * row[ax.i1]));
                            }
                        }
                        dst[q] = acc;
                    }
                }
            }
        }

    nodes.push_back(std::move(out));
    Var ov{static_cast<int>(nodes.size()) - 1};

    if (recording) {
        Tape* tape = this;
        int xi = xv.id, oi = ov.id;
        at(ov).backward = [tape, xi, oi, tz, ty, tx]() {
            Node& xn2 = tape->nodes[static_cast<std::size_t>(xi)];
            Node& on2 = tape->nodes[static_cast<std::size_t>(oi)];
            Shape xs2 = xn2.shape, os2 = on2.shape;
            const std::size_t xsp = xs2.spatial(), osp = os2.spatial();
            for (int n = 0; n < xs2.n; ++n)
                for (int c = 0; c < xs2.c; ++c) {
                    T* gx = xn2.grad.data() + (static_cast<std::size_t>(n) * xs2.c + c) * xsp;
                    const T* go = on2.grad.data() + (static_cast<std::size_t>(n) * os2.c + c) * osp;
                    std::size_t q = 0;
                    for (int oz = 0; oz < os2.d; ++oz) {
                        const auto& az = tz[static_cast<std::size_t>(oz)];
                        for (int oy = 0; oy < os2.h; ++oy) {
                            const auto& ay = ty[static_cast<std::size_t>(oy)];
                            for (int ox = 0; ox < os2.w; ++ox, ++q) {
                                const auto& ax = tx[static_cast<std::size_t>(ox)];
                                T g = go[q];
                                if (g == T(0)) continue;
                                for (int bz = 0; bz < 2; ++bz) {
                                    int iz = bz ? az.i1 : az.i0;
                                    double wz = bz ? az.w1 : az.w0;
                                    if (wz == 0.0) continue;
                                    for (int by = 0; by < 2; ++by) {
                                        int iy = by ? ay.i1 : ay.i0;
                                        double wy = by ? ay.w1 : ay.w0;
                                        if (wy == 0.0) continue;
                                        T* row = gx +
                                                 (static_cast<std::size_t>(iz) * xs2.h + iy) * xs2.w;
                                        row[ax.i0] += static_cast<T>(wz * wy * ax.w0) * g;
                                        row[ax.i1] += static_cast<T>(wz * wy * ax.w1) * g;
                                    }
                                }
                            }
                        }
                    }
                }
        };
    }
    return ov;
}

template <typename T>
Var Tape<T>::linear(Var xv, Var wv, Var bv) {
    const Node& xn = at(xv);
    const Node& wn = at(wv);
    const Node& bn = at(bv);
    // x (N, F) as shape (n=N, c=F); w (G, F) as shape (n=G, c=F); b (G)
    Shape xs = xn.shape, ws = wn.shape;
    const int N = xs.n;
    const std::size_t F = xs.numel() / static_cast<std::size_t>(N);
    if (ws.numel() % F != 0) throw ShapeMismatch("linear weight vs input features");
    const int G = static_cast<int>(ws.numel() / F);
    if (bn.shape.numel() != static_cast<std::size_t>(G)) throw ShapeMismatch("linear bias");

    Shape os;
    os.n = N;
    os.c = G;
    Node out;
    out.shape = os;
    out.value.assign(os.numel(), T(0));
    const T* X = xn.value.data();
    const T* W = wn.value.data();
    const T* B = bn.value.data();
    T* O = out.value.data();
    for (int n = 0; n < N; ++n)
        for (int g = 0; g < G; ++g) {
            T acc = B[g];
            const T* xr = X + static_cast<std::size_t>(n) * F;
            const T* wr = W + static_cast<std::size_t>(g) * F;
            for (std::size_t f = 0; f < F; ++f) acc += wr[f] * xr[f];
            O[static_cast<std::size_t>(n) * G + g] = acc;
        }

    nodes.push_back(std::move(out));
    Var ov{static_cast<int>(nodes.size()) - 1};
    if (recording) {
        Tape* tape = this;
        int xi = xv.id, wi = wv.id, bi = bv.id, oi = ov.id;
        at(ov).backward = [tape, xi, wi, bi, oi, N, F, G]() {
            Node& xn2 = tape->nodes[static_cast<std::size_t>(xi)];
            Node& wn2 = tape->nodes[static_cast<std::size_t>(wi)];
            Node& bn2 = tape->nodes[static_cast<std::size_t>(bi)];
            Node& on2 = tape->nodes[static_cast<std::size_t>(oi)];
            const T* X = xn2.value.data();
            const T* W = wn2.value.data();
            const T* GO = on2.grad.data();
            for (int n = 0; n < N; ++n)
                for (int g = 0; g < G; ++g) {
                    T go = GO[static_cast<std::size_t>(n) * G + g];
                    if (go == T(0)) continue;
                    bn2.grad[static_cast<std::size_t>(g)] += go;
                    const T* xr = X + static_cast<std::size_t>(n) * F;
                    const T* wr = W + static_cast<std::size_t>(g) * F;
                    T* gxr = xn2.grad.data() + static_cast<std::size_t>(n) * F;
                    T* gwr = wn2.grad.data() + static_cast<std::size_t>(g) * F;
                    for (std::size_t f = 0; f < F; ++f) {
                        gxr[f] += go * wr[f];
                        gwr[f] += go * xr[f];
                    }
                }
        };
    }
    return ov;
}

template <typename T>
Var Tape<T>::reshape(Var xv, Shape s) {
    const Node& xn = at(xv);
    if (s.numel() != xn.shape.numel())
        throw ShapeMismatch("reshape " + xn.shape.str() + " -> " + s.str());
    Node out;
    out.shape = s;
    out.value = xn.value;
    nodes.push_back(std::move(out));
    Var ov{static_cast<int>(nodes.size()) - 1};
    if (recording) {
        Tape* tape = this;
        int xi = xv.id, oi = ov.id;
        at(ov).backward = [tape, xi, oi]() {
            Node& xn2 = tape->nodes[static_cast<std::size_t>(xi)];
            Node& on2 = tape->nodes[static_cast<std::size_t>(oi)];
            for (std::size_t q = 0; q < on2.grad.size(); ++q) xn2.grad[q] += on2.grad[q];
        };
    }
    return ov;
}

template <typename T>
Var Tape<T>::soft_dice(Var av, Var bv, T alpha) {
    const Node& an = at(av);
    const Node& bn = at(bv);
    if (!(an.shape == bn.shape))
        throw ShapeMismatch("soft_dice: " + an.shape.str() + " vs " + bn.shape.str());
    Shape s = an.shape;
    const std::size_t sp = s.spatial();
    const int pairs = s.n * s.c;

    std::vector<T> inter(static_cast<std::size_t>(pairs)), denom(static_cast<std::size_t>(pairs));
    T loss = T(0);
    for (int p = 0; p < pairs; ++p) {
        const T* pa = an.value.data() + static_cast<std::size_t>(p) * sp;
        const T* pb = bn.value.data() + static_cast<std::size_t>(p) * sp;
        T i2 = T(0), sa = T(0), sb = T(0);
        for (std::size_t q = 0; q < sp; ++q) {
            i2 += pa[q] * pb[q];
            sa += pa[q];
            sb += pb[q];
        }
        inter[static_cast<std::size_t>(p)] = i2;
        denom[static_cast<std::size_t>(p)] = sa + sb + alpha;
        loss += T(1) - T(2) * i2 / denom[static_cast<std::size_t>(p)];
    }
    loss /= static_cast<T>(pairs);

    Node out;
    out.shape = Shape{1, 1, 1, 1, 1};
    out.value = {loss};
    nodes.push_back(std::move(out));
    Var ov{static_cast<int>(nodes.size()) - 1};
    if (recording) {
        Tape* tape = this;
        int ai = av.id, bi = bv.id, oi = ov.id;
        auto inter_v = std::move(inter);
        auto denom_v = std::move(denom);
        at(ov).backward = [tape, ai, bi, oi, inter_v, denom_v, pairs]() {
            Node& an2 = tape->nodes[static_cast<std::size_t>(ai)];
            Node& bn2 = tape->nodes[static_cast<std::size_t>(bi)];
            Node& on2 = tape->nodes[static_cast<std::size_t>(oi)];
            const std::size_t sp = an2.shape.spatial();
            T g0 = on2.grad[0] / static_cast<T>(pairs);
            for (int p = 0; p < pairs; ++p) {
                const T* pa = an2.value.data() + static_cast<std::size_t>(p) * sp;
                const T* pb = bn2.value.data() + static_cast<std::size_t>(p) * sp;
                T* ga = an2.grad.data() + static_cast<std::size_t>(p) * sp;
                T* gb = bn2.grad.data() + static_cast<std::size_t>(p) * sp;
                T I = inter_v[static_cast<std::size_t>(p)];
                T S = denom_v[static_cast<std::size_t>(p)];
                T invS2 = T(1) / (S * S);
                for (std::size_t q = 0; q < sp; ++q) {
                    // d(1 - 2I/S)/da = -2 (b S - I) / S^2, dS/da = 1
                    ga[q] += g0 * (T(-2) * (pb[q] * S - I) * invS2);
                    gb[q] += g0 * (T(-2) * (pa[q] * S - I) * invS2);
                }
            }
        };
    }
    return ov;
}

template <typename T>
Var Tape<T>::kl_divergence(Var muv, Var lvv) {
    const Node& mn = at(muv);
    const Node& ln = at(lvv);
    if (!(mn.shape == ln.shape)) throw ShapeMismatch("kl_divergence shapes");
    const int N = mn.shape.n;
    const std::size_t L = mn.shape.numel() / static_cast<std::size_t>(N);

    T total = T(0);
    for (std::size_t q = 0; q < mn.value.size(); ++q) {
        T mu = mn.value[q], lv = ln.value[q];
        total += T(-0.5) * (T(1) + lv - mu * mu - std::exp(lv));
    }
    total /= static_cast<T>(N);

    Node out;
    out.shape = Shape{1, 1, 1, 1, 1};
    out.value = {total};
    nodes.push_back(std::move(out));
    Var ov{static_cast<int>(nodes.size()) - 1};
    (void)L;
    if (recording) {
        Tape* tape = this;
        int mi = muv.id, li = lvv.id, oi = ov.id;
        at(ov).backward = [tape, mi, li, oi, N]() {
            Node& mn2 = tape->nodes[static_cast<std::size_t>(mi)];
            Node& ln2 = tape->nodes[static_cast<std::size_t>(li)];
            Node& on2 = tape->nodes[static_cast<std::size_t>(oi)];
            T g0 = on2.grad[0] / static_cast<T>(N);
            for (std::size_t q = 0; q < mn2.value.size(); ++q) {
                mn2.grad[q] += g0 * mn2.value[q];
                ln2.grad[q] += g0 * T(0.5) * (std::exp(ln2.value[q]) - T(1));
            }
        };
    }
    return ov;
}

template <typename T>
Var Tape<T>::reparameterize(Var muv, Var lvv, Var epsv) {
    const Node& mn = at(muv);
    const Node& ln = at(lvv);
    const Node& en = at(epsv);
    if (!(mn.shape == ln.shape) || !(mn.shape == en.shape))
        throw ShapeMismatch("reparameterize shapes");
    Node out;
    out.shape = mn.shape;
    out.value.resize(mn.value.size());
    for (std::size_t q = 0; q < mn.value.size(); ++q)
        out.value[q] = mn.value[q] + std::exp(T(0.5) * ln.value[q]) * en.value[q];
    nodes.push_back(std::move(out));
    Var ov{static_cast<int>(nodes.size()) - 1};
    if (recording) {
        Tape* tape = this;
        int mi = muv.id, li = lvv.id, ei = epsv.id, oi = ov.id;
        at(ov).backward = [tape, mi, li, ei, oi]() {
            Node& mn2 = tape->nodes[static_cast<std::size_t>(mi)];
            Node& ln2 = tape->nodes[static_cast<std::size_t>(li)];
            Node& en2 = tape->nodes[static_cast<std::size_t>(ei)];
            Node& on2 = tape->nodes[static_cast<std::size_t>(oi)];
            for (std::size_t q = 0; q < mn2.value.size(); ++q) {
                T g = on2.grad[q];
                mn2.grad[q] += g;
                ln2.grad[q] += g * T(0.5) * std::exp(T(0.5) * ln2.value[q]) * en2.value[q];
            }
        };
    }
    return ov;
}

template <typename T>
Var Tape<T>::axpby(Var av, T sa, Var bv, T sb) {
    const Node& an = at(av);
    const Node& bn = at(bv);
    if (!(an.shape == bn.shape)) throw ShapeMismatch("axpby shapes");
    Node out;
    out.shape = an.shape;
    out.value.resize(an.value.size());
    for (std::size_t q = 0; q < an.value.size(); ++q)
        out.value[q] = sa * an.value[q] + sb * bn.value[q];
    nodes.push_back(std::move(out));
    Var ov{static_cast<int>(nodes.size()) - 1};
    if (recording) {
        Tape* tape = this;
        int ai = av.id, bi = bv.id, oi = ov.id;
        at(ov).backward = [tape, ai, bi, oi, sa, sb]() {
            Node& an2 = tape->nodes[static_cast<std::size_t>(ai)];
            Node& bn2 = tape->nodes[static_cast<std::size_t>(bi)];
            Node& on2 = tape->nodes[static_cast<std::size_t>(oi)];
            for (std::size_t q = 0; q < on2.grad.size(); ++q) {
                an2.grad[q] += sa * on2.grad[q];
                bn2.grad[q] += sb * on2.grad[q];
            }
        };
    }
    return ov;
}

} // namespace cranio::nn

#endif
