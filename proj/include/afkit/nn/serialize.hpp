#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "afkit/nn/network.hpp"

namespace afkit::nn {

inline constexpr char kModelMagic[8] = {'A', 'F', 'K', 'M', 'D', 'L', '0', '1'};
inline constexpr uint32_t kModelVersion = 1;

// Rebuilds a layer from its kind string and config() json.
template <class T>
std::unique_ptr<Layer<T>> layer_from_config(const std::string& kind, const json& c) {
    auto act = [&](const char* key = "activation") {
        return act_from_name(c.value(key, std::string("linear")));
    };
    auto alpha = [&] { return static_cast<T>(c.value("alpha", 0.0)); };
    if (kind == "Dense") return std::make_unique<Dense<T>>(c.at("units").get<size_t>(), act(), alpha());
    if (kind == "Conv1D")
        return std::make_unique<Conv1D<T>>(
            c.at("filters").get<size_t>(), c.at("kernel_size").get<size_t>(),
            c.value("stride", size_t{1}), padding_from_name(c.value("padding", std::string("valid"))),
            act(), alpha());
    if (kind == "Deconv1D")
        return std::make_unique<Deconv1D<T>>(c.at("filters").get<size_t>(),
                                             c.at("kernel_size").get<size_t>(),
                                             c.value("stride", size_t{2}), act(), alpha());
    if (kind == "MaxPool1D")
        return std::make_unique<MaxPool1D<T>>(
            c.value("pool", size_t{2}), c.value("stride", size_t{2}),
            padding_from_name(c.value("padding", std::string("same"))));
    if (kind == "BatchNorm")
        return std::make_unique<BatchNorm<T>>(static_cast<T>(c.value("momentum", 0.99)),
                                              static_cast<T>(c.value("epsilon", 1e-3)));
    if (kind == "Dropout") return std::make_unique<Dropout<T>>(c.at("rate").get<double>());
    if (kind == "Flatten") return std::make_unique<Flatten<T>>();
    if (kind == "RepeatVector")
        return std::make_unique<RepeatVector<T>>(c.at("n").get<size_t>());
    if (kind == "Activation") return std::make_unique<Activation<T>>(act(), alpha());
    if (kind == "LSTM")
        return std::make_unique<Lstm<T>>(c.at("units").get<size_t>(),
                                         c.at("return_sequences").get<bool>());
    if (kind == "BiLSTM")
        return std::make_unique<BiLstm<T>>(c.at("units").get<size_t>(),
                                           c.at("return_sequences").get<bool>());
    throw ParseError("unknown layer kind: " + kind);
}

template <class T>
json architecture_json(Network<T>& net) {
    json layers = json::array();
    for (size_t i = 0; i < net.size(); ++i)
        layers.push_back({{"kind", net.layer(i).kind()}, {"config", net.layer(i).config()}});
    return {{"input_shape", net.input_shape()}, {"layers", layers}};
}

template <class T>
Network<T> network_from_json(const json& arch) {
    Network<T> net;
    for (const auto& l : arch.at("layers"))
        net.add(layer_from_config<T>(l.at("kind").get<std::string>(), l.at("config")));
    Shape in = arch.at("input_shape").get<Shape>();
    net.build(in, /*init_seed=*/0);
    return net;
}

namespace detail {

template <class V>
void write_pod(std::ostream& os, const V& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <class V>
V read_pod(std::istream& is) {
    V v;
    is.read(reinterpret_cast<char*>(&v), sizeof(V));
    if (!is) throw ParseError("model stream truncated");
    return v;
}

}  // namespace detail

// Versioned binary container: magic, version, architecture json, then one
// float32 little-endian blob per parameter tensor (running statistics
// included), in layer order.
template <class T>
void save_network(std::ostream& os, Network<T>& net, const json& meta = json::object()) {
    os.write(kModelMagic, sizeof(kModelMagic));
    detail::write_pod(os, kModelVersion);
    json header = {{"architecture", architecture_json(net)}, {"meta", meta}};
    const std::string hs = header.dump();
    detail::write_pod(os, static_cast<uint64_t>(hs.size()));
    os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    auto params = net.params();
    detail::write_pod(os, static_cast<uint64_t>(params.size()));
    for (auto* p : params) {
        detail::write_pod(os, static_cast<uint64_t>(p->value.shape.size()));
        for (size_t d : p->value.shape) detail::write_pod(os, static_cast<uint64_t>(d));
        for (T v : p->value.data) detail::write_pod(os, static_cast<float>(v));
    }
}

template <class T>
Network<T> load_network(std::istream& is, json* meta_out = nullptr) {
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0)
        throw ParseError("not a model file (bad magic)");
    const auto version = detail::read_pod<uint32_t>(is);
    if (version != kModelVersion)
        throw VersionError("model version " + std::to_string(version) +
                           " not supported (expected " + std::to_string(kModelVersion) +
                           ")");
    const auto hlen = detail::read_pod<uint64_t>(is);
    std::string hs(hlen, '\0');
    is.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!is) throw ParseError("model stream truncated in header");
    json header = json::parse(hs, nullptr, false);
    if (header.is_discarded()) throw ParseError("model header is not valid json");

    Network<T> net = network_from_json<T>(header.at("architecture"));
    auto params = net.params();
    const auto n_params = detail::read_pod<uint64_t>(is);
    if (n_params != params.size())
        throw ParseError("model parameter count mismatch: file has " +
                         std::to_string(n_params) + ", architecture needs " +
                         std::to_string(params.size()));
    for (auto* p : params) {
        const auto ndim = detail::read_pod<uint64_t>(is);
        Shape s(ndim);
        for (auto& d : s) d = static_cast<size_t>(detail::read_pod<uint64_t>(is));
        if (s != p->value.shape)
            throw ParseError("model parameter shape mismatch for " + p->name);
        for (auto& v : p->value.data) v = static_cast<T>(detail::read_pod<float>(is));
    }
    if (meta_out) *meta_out = header.value("meta", json::object());
    return net;
}

template <class T>
void save_network_file(const std::string& path, Network<T>& net,
                       const json& meta = json::object()) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write model file: " + path);
    save_network(os, net, meta);
}

template <class T>
Network<T> load_network_file(const std::string& path, json* meta_out = nullptr) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot read model file: " + path);
    return load_network<T>(is, meta_out);
}

}  // namespace afkit::nn
