#ifndef CRANIO_UNET_HPP
#define CRANIO_UNET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cranio/rng.hpp"
#include "cranio/tensor.hpp"

namespace cranio::nn {

struct UNetDescriptor {
    int in_channels = 1;
    int out_channels = 1;
    int levels = 2;        // downsampling steps; input D,H,W must divide 2^levels
    int base_channels = 8;
    int blocks_per_level = 1;
    int norm_groups = 4;   // clamped to divide the channel count

    int channels_at(int level) const { return base_channels << level; }
};

inline int effective_groups(int requested, int channels) {
    int g = std::min(requested, channels);
    while (channels % g != 0) --g;
    return g;
}

// Encoder-decoder with residual blocks, strided-conv downsampling and
// trilinear-upsample + 1x1x1-conv upsampling; concatenation skips; logistic
// head. All parameters live in `params` under stable names.
template <typename T>
class UNet {
public:
    UNetDescriptor desc;
    std::vector<Param<T>> params;

    static UNet build(const UNetDescriptor& d, std::uint64_t seed);

    // Runs the network and binds the tape to this network's parameters;
    // a tape serves one network per forward/backward cycle.
    Var forward(Tape<T>& tape, Var x);

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& p : params) n += p.value.size();
        return n;
    }

    int find(const std::string& name) const {
        for (std::size_t i = 0; i < params.size(); ++i)
            if (params[i].name == name) return static_cast<int>(i);
        throw ShapeMismatch("unknown parameter " + name);
    }

private:
    struct Ids {
        int w, b;
    };
    struct NormIds {
        int g, b;
    };

    Ids conv_ids(const std::string& prefix) const {
        return {find(prefix + ".w"), find(prefix + ".b")};
    }
    NormIds norm_ids(const std::string& prefix) const {
        return {find(prefix + ".g"), find(prefix + ".b")};
    }

    Var conv(Tape<T>& tape, Var x, const std::string& prefix, int stride = 1) const {
        Ids ids = conv_ids(prefix);
        return tape.conv3d(x, tape.leaf(ids.w), tape.leaf(ids.b), stride);
    }
    Var norm(Tape<T>& tape, Var x, const std::string& prefix, int channels) const {
        NormIds ids = norm_ids(prefix);
        return tape.group_norm(x, tape.leaf(ids.g), tape.leaf(ids.b),
                               effective_groups(desc.norm_groups, channels));
    }
    Var res_block(Tape<T>& tape, Var x, const std::string& prefix, int cin, int cout) const;
};

// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void add_conv_param(std::vector<Param<T>>& params, const std::string& prefix, int cout, int cin,
                    int k, Rng& rng) {
    Param<T> w;
    w.init_zero(prefix + ".w", Shape{cout, cin, k, k, k});
    double stddev = std::sqrt(2.0 / (static_cast<double>(cin) * k * k * k));
    for (auto& v : w.value) v = static_cast<T>(rng.normal() * stddev);
    params.push_back(std::move(w));
    Param<T> b;
    b.init_zero(prefix + ".b", Shape{cout, 1, 1, 1, 1});
    params.push_back(std::move(b));
}

template <typename T>
void add_norm_param(std::vector<Param<T>>& params, const std::string& prefix, int channels) {
    Param<T> g;
    g.init_zero(prefix + ".g", Shape{channels, 1, 1, 1, 1});
    std::fill(g.value.begin(), g.value.end(), T(1));
    params.push_back(std::move(g));
    Param<T> b;
    b.init_zero(prefix + ".b", Shape{channels, 1, 1, 1, 1});
    params.push_back(std::move(b));
}

template <typename T>
void add_res_block(std::vector<Param<T>>& params, const std::string& prefix, int cin, int cout,
                   Rng& rng) {
    add_conv_param(params, prefix + ".conv1", cout, cin, 3, rng);
    add_norm_param(params, prefix + ".norm1", cout);
    add_conv_param(params, prefix + ".conv2", cout, cout, 3, rng);
    add_norm_param(params, prefix + ".norm2", cout);
    if (cin != cout) add_conv_param(params, prefix + ".proj", cout, cin, 1, rng);
}

} // namespace detail

template <typename T>
UNet<T> UNet<T>::build(const UNetDescriptor& d, std::uint64_t seed) {
    UNet<T> net;
    net.desc = d;
    Rng rng(seed ^ 0xA5C1E9D2B7ULL);

    detail::add_conv_param(net.params, "stem", d.base_channels, d.in_channels, 3, rng);
    detail::add_norm_param(net.params, "stem_norm", d.base_channels);

    for (int l = 0; l < d.levels; ++l) {
        int c = d.channels_at(l);
        for (int bidx = 0; bidx < d.blocks_per_level; ++bidx)
            detail::add_res_block(net.params, "enc" + std::to_string(l) + ".block" +
                                                  std::to_string(bidx),
                                  c, c, rng);
        detail::add_conv_param(net.params, "down" + std::to_string(l), 2 * c, c, 3, rng);
        detail::add_norm_param(net.params, "down" + std::to_string(l) + "_norm", 2 * c);
    }

    int cb = d.channels_at(d.levels);
    for (int bidx = 0; bidx < d.blocks_per_level; ++bidx)
        detail::add_res_block(net.params, "bottleneck.block" + std::to_string(bidx), cb, cb, rng);

    for (int l = d.levels - 1; l >= 0; --l) {
        int c = d.channels_at(l);
        detail::add_conv_param(net.params, "up" + std::to_string(l), c, 2 * c, 1, rng);
        detail::add_norm_param(net.params, "up" + std::to_string(l) + "_norm", c);
        // concat with the skip doubles the input channels of the first block
        for (int bidx = 0; bidx < d.blocks_per_level; ++bidx)
            detail::add_res_block(net.params, "dec" + std::to_string(l) + ".block" +
                                                  std::to_string(bidx),
                                  bidx == 0 ? 2 * c : c, c, rng);
    }

    detail::add_conv_param(net.params, "head", d.out_channels, d.base_channels, 1, rng);
    return net;
}

template <typename T>
Var UNet<T>::res_block(Tape<T>& tape, Var x, const std::string& prefix, int cin, int cout) const {
    Var main = conv(tape, x, prefix + ".conv1");
    main = norm(tape, main, prefix + ".norm1", cout);
    main = tape.leaky_relu(main);
    main = conv(tape, main, prefix + ".conv2");
    main = norm(tape, main, prefix + ".norm2", cout);
    Var shortcut = (cin == cout) ? x : conv(tape, x, prefix + ".proj");
    return tape.leaky_relu(tape.add(main, shortcut));
}

template <typename T>
Var UNet<T>::forward(Tape<T>& tape, Var x) const {
    Tape<T>* bound = &tape;
    if (bound->params == nullptr)
        bound->params = const_cast<std::vector<Param<T>>*>(&params);

    Shape s = tape.shape(x);
    int div = 1 << desc.levels;
    if (s.d % div || s.h % div || s.w % div)
        throw ShapeMismatch("unet input " + s.str() + " not divisible by 2^levels");

    Var cur = conv(tape, x, "stem");
    cur = norm(tape, cur, "stem_norm", desc.base_channels);
    cur = tape.leaky_relu(cur);

    std::vector<Var> skips;
    for (int l = 0; l < desc.levels; ++l) {
        int c = desc.channels_at(l);
        for (int bidx = 0; bidx < desc.blocks_per_level; ++bidx)
            cur = res_block(tape, cur, "enc" + std::to_string(l) + ".block" + std::to_string(bidx),
                            c, c);
        skips.push_back(cur);
        cur = conv(tape, cur, "down" + std::to_string(l), 2);
        cur = norm(tape, cur, "down" + std::to_string(l) + "_norm", 2 * c);
        cur = tape.leaky_relu(cur);
    }

    int cb = desc.channels_at(desc.levels);
    for (int bidx = 0; bidx < desc.blocks_per_level; ++bidx)
        cur = res_block(tape, cur, "bottleneck.block" + std::to_string(bidx), cb, cb);

    for (int l = desc.levels - 1; l >= 0; --l) {
        int c = desc.channels_at(l);
        cur = tape.upsample2x(cur);
        cur = conv(tape, cur, "up" + std::to_string(l));
        cur = norm(tape, cur, "up" + std::to_string(l) + "_norm", c);
        cur = tape.leaky_relu(cur);
        cur = tape.concat_channels(cur, skips[static_cast<std::size_t>(l)]);
        for (int bidx = 0; bidx < desc.blocks_per_level; ++bidx)
            cur = res_block(tape, cur, "dec" + std::to_string(l) + ".block" + std::to_string(bidx),
                            bidx == 0 ? 2 * c : c, c);
    }

    cur = conv(tape, cur, "head");
    return tape.sigmoid(cur);
}

} // namespace cranio::nn

#endif
