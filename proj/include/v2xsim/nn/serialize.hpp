#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "v2xsim/nn/model.hpp"

namespace v2x::nn {

// Self-describing little-endian binary weight file:
//   magic "V2XGRU1\n", u32 layer count, per layer {u8 kind, u8 activation,
//   u32 in, u32 out}, then the raw f64 tensors in for_each_tensor order.
inline constexpr char kWeightMagic[8] = {'V', '2', 'X', 'G', 'R', 'U', '1', '\n'};

namespace detail {

inline void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline std::uint32_t read_u32(std::istream& in, const char* what) {
    std::uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw ParseError(std::string("weight file truncated reading ") + what);
    return v;
}

inline void read_f64(std::istream& in, double* d, std::size_t n, const std::string& what) {
    if (!in.read(reinterpret_cast<char*>(d), static_cast<std::streamsize>(n * sizeof(double))))
        throw ParseError("weight file truncated reading " + what);
}

} // namespace detail

inline void save_model(const GruModel& model, std::ostream& out) {
    model.validate_chain();
    out.write(kWeightMagic, sizeof kWeightMagic);
    detail::write_u32(out, static_cast<std::uint32_t>(model.gru.size() + model.dense.size()));
    for (const auto& l : model.gru) {
        out.put(0);
        out.put(0);
        detail::write_u32(out, static_cast<std::uint32_t>(l.input_size()));
        detail::write_u32(out, static_cast<std::uint32_t>(l.hidden_size()));
    }
    for (const auto& l : model.dense) {
        out.put(1);
        out.put(l.act == Activation::relu ? 1 : 0);
        detail::write_u32(out, static_cast<std::uint32_t>(l.input_size()));
        detail::write_u32(out, static_cast<std::uint32_t>(l.output_size()));
    }
    for_each_tensor(const_cast<GruModel&>(model),
                    [&](const std::string&, double* d, std::size_t n) {
                        out.write(reinterpret_cast<const char*>(d),
                                  static_cast<std::streamsize>(n * sizeof(double)));
                    });
}

inline void save_model(const GruModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write weight file '" + path + "'");
    save_model(model, out);
    if (!out) throw ParseError("short write to weight file '" + path + "'");
}

inline GruModel load_model(std::istream& in) {
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kWeightMagic, sizeof magic) != 0)
        throw ParseError("weight file: bad magic/version header");
    const std::uint32_t n_layers = detail::read_u32(in, "layer count");
    if (n_layers == 0 || n_layers > 64) throw ParseError("weight file: implausible layer count");

    GruModel m;
    bool in_dense = false;
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        const int kind = in.get();
        const int act = in.get();
        if (kind == EOF || act == EOF)
            throw ParseError("weight file truncated reading layer " + std::to_string(i));
        const std::uint32_t din = detail::read_u32(in, "layer input dim");
        const std::uint32_t dout = detail::read_u32(in, "layer output dim");
        if (din == 0 || dout == 0 || din > 100000 || dout > 100000)
            throw ParseError("weight file: implausible dims in layer " + std::to_string(i));
        if (kind == 0) {
            if (in_dense)
                throw ParseError("weight file: GRU layer after dense head (layer " +
                                 std::to_string(i) + ")");
            m.gru.emplace_back(din, dout);
        } else if (kind == 1) {
            in_dense = true;
            m.dense.emplace_back(din, dout,
                                 act == 1 ? Activation::relu : Activation::linear);
        } else {
            throw ParseError("weight file: unknown layer kind in layer " + std::to_string(i));
        }
    }
    m.validate_chain();
    for_each_tensor(m, [&](const std::string& name, double* d, std::size_t n) {
        detail::read_f64(in, d, n, name);
    });
    in.peek();
    if (!in.eof()) throw ParseError("weight file: trailing bytes after weights");
    return m;
}

inline GruModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open weight file '" + path + "'");
    return load_model(in);
}

} // namespace v2x::nn
