#include "hybridnet/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hybridnet {

using nlohmann::json;

namespace {

json real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

/// Field access that reports the full path of whatever is wrong.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    [[nodiscard]] Reader at(std::string_view key) const {
        const std::string p = path_.empty() ? std::string(key) : path_ + "." + std::string(key);
        if (!j_.is_object() || !j_.contains(key)) throw Error("model JSON: missing field '" + p + "'");
        return Reader(j_.at(std::string(key)), p);
    }
    [[nodiscard]] Reader at(std::size_t i) const {
        const std::string p = path_ + "[" + std::to_string(i) + "]";
        if (!j_.is_array() || i >= j_.size()) throw Error("model JSON: missing element '" + p + "'");
        return Reader(j_.at(i), p);
    }
    [[nodiscard]] bool has(std::string_view key) const { return j_.is_object() && j_.contains(key); }
    [[nodiscard]] std::size_t size() const {
        if (!j_.is_array()) fail("expected an array");
        return j_.size();
    }

    [[nodiscard]] double real() const {
        if (j_.is_string()) {
            const auto s = j_.get<std::string>();
            if (s == "inf") return std::numeric_limits<double>::infinity();
            if (s == "-inf") return -std::numeric_limits<double>::infinity();
        }
        if (!j_.is_number()) fail("expected a number");
        return j_.get<double>();
    }
    [[nodiscard]] long long integer() const {
        if (!j_.is_number_integer()) fail("expected an integer");
        return j_.get<long long>();
    }
    [[nodiscard]] std::size_t count() const {
        const auto v = integer();
        if (v < 0) fail("expected a non-negative integer");
        return static_cast<std::size_t>(v);
    }
    [[nodiscard]] std::string text() const {
        if (!j_.is_string()) fail("expected a string");
        return j_.get<std::string>();
    }
    [[nodiscard]] Vec reals() const {
        Vec out(size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).real();
        return out;
    }
    [[nodiscard]] std::vector<Vec> matrix() const {
        std::vector<Vec> out(size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).reals();
        return out;
    }
    [[nodiscard]] std::vector<std::int8_t> signs() const {
        std::vector<std::int8_t> out(size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            const auto v = at(i).integer();
            if (v != 1 && v != -1) at(i).fail("expected +1 or -1");
            out[i] = static_cast<std::int8_t>(v);
        }
        return out;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error("model JSON: field '" + path_ + "': " + what);
    }

private:
    const json& j_;
    std::string path_;
};

json quantizer_json(const Quantizer& q) {
    return {{"levels", q.levels},
             {"lo", real(q.lo)},
             {"hi", real(q.hi)},
             {"encoding", q.encoding == Encoding::thermometer ? "thermometer" : "positional-binary"}};
}

Quantizer read_quantizer(const Reader& r) {
    Quantizer q;
    q.levels = static_cast<int>(r.at("levels").integer());
    q.lo = r.at("lo").real();
    q.hi = r.at("hi").real();
    const auto enc = r.at("encoding").text();
    if (enc == "thermometer") {
        q.encoding = Encoding::thermometer;
    } else if (enc == "positional-binary") {
        q.encoding = Encoding::positional_binary;
    } else {
        r.at("encoding").fail("unknown encoding '" + enc + "'");
    }
    if (q.levels < 2) r.at("levels").fail("must be >= 2");
    return q;
}

json cc4_json(const Cc4Network& net) {
    json ex = json::array();
    for (const auto& u : net.units()) {
        ex.push_back({{"weights", u.weights}, {"bias_weight", u.bias_weight}, {"output_weights", u.output_weights}});
    }
    return {{"kind", "cc4"},
            {"r", net.radius()},
            {"input_bits", net.input_bits()},
            {"output_bits", net.output_bits()},
            {"exemplars", ex}};
}

Cc4Network read_cc4(const Reader& r) {
    const auto radius = r.at("r").integer();
    const auto in_bits = r.at("input_bits").count();
    const auto out_bits = r.at("output_bits").count();
    const auto ex = r.at("exemplars");
    std::vector<Cc4Network::HiddenUnit> units(ex.size());
    for (std::size_t i = 0; i < units.size(); ++i) {
        const auto e = ex.at(i);
        units[i].weights = e.at("weights").signs();
        units[i].bias_weight = static_cast<int>(e.at("bias_weight").integer());
        units[i].output_weights = e.at("output_weights").signs();
        if (units[i].weights.size() != in_bits) e.at("weights").fail("length != input_bits");
        if (units[i].output_weights.size() != out_bits) e.at("output_weights").fail("length != output_bits");
    }
    return Cc4Network(static_cast<int>(radius), in_bits, out_bits, std::move(units));
}

json normalizer_json(const Normalizer& n) {
    json lo = json::array(), hi = json::array();
    for (double v : n.lo()) lo.push_back(real(v));
    for (double v : n.hi()) hi.push_back(real(v));
    return {{"lo", lo}, {"hi", hi}};
}

json reals_json(const Vec& v) {
    json a = json::array();
    for (double x : v) a.push_back(real(x));
    return a;
}

json matrix_json(const std::vector<Vec>& m) {
    json a = json::array();
    for (const auto& row : m) a.push_back(reals_json(row));
    return a;
}

json to_json(const Model& m) {
    return std::visit(
        [](const auto& model) -> json {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, Cc4Network>) {
                return cc4_json(model);
            } else if constexpr (std::is_same_v<T, Cc4Regressor>) {
                json j = cc4_json(model.network());
                json inputs = json::array();
                for (const auto& q : model.input_quantizers()) inputs.push_back(quantizer_json(q));
                j["quantizers"] = {{"inputs", inputs}, {"output", quantizer_json(model.output_quantizer())}};
                return j;
            } else if constexpr (std::is_same_v<T, FcNetwork>) {
                return {{"kind", "fc"},
                        {"W", matrix_json(model.exemplars())},
                        {"u", matrix_json(model.outputs())},
                        {"rho", reals_json(model.radii())},
                        {"sigma", reals_json(model.widths())},
                        {"k", model.k()},
                        {"normalizer", normalizer_json(model.normalizer())}};
            } else {
                json weights = json::array(), biases = json::array(), acts = json::array();
                for (std::size_t l = 0; l < model.layers().size(); ++l) {
                    const auto& L = model.layers()[l];
                    weights.push_back(reals_json(L.weights));
                    biases.push_back(reals_json(L.biases));
                    acts.push_back(l + 1 < model.layers().size() ? "sigmoid" : "linear");
                }
                return {{"kind", "mlp"},
                        {"sizes", model.sizes()},
                        {"weights", weights},
                        {"biases", biases},
                        {"activations", acts}};
            }
        },
        m);
}

Model from_json(const json& j) {
    const Reader root(j, "");
    const auto kind = root.at("kind").text();
    if (kind == "cc4") {
        auto net = read_cc4(root);
        if (!root.has("quantizers")) return net;
        const auto q = root.at("quantizers");
        const auto ins = q.at("inputs");
        std::vector<Quantizer> in_q(ins.size());
        for (std::size_t i = 0; i < in_q.size(); ++i) in_q[i] = read_quantizer(ins.at(i));
        return Cc4Regressor(std::move(in_q), read_quantizer(q.at("output")), std::move(net));
    }
    if (kind == "fc") {
        const auto norm = root.at("normalizer");
        return FcNetwork(root.at("W").matrix(), root.at("u").matrix(), root.at("rho").reals(),
                         root.at("sigma").reals(), root.at("k").count(),
                         Normalizer(norm.at("lo").reals(), norm.at("hi").reals()));
    }
    if (kind == "mlp") {
        const auto sizes = root.at("sizes");
        const auto weights = root.at("weights");
        const auto biases = root.at("biases");
        const auto acts = root.at("activations");
        const std::size_t n_layers = sizes.size() < 2 ? 0 : sizes.size() - 1;
        if (weights.size() != n_layers) root.at("weights").fail("expected one entry per layer");
        if (biases.size() != n_layers) root.at("biases").fail("expected one entry per layer");
        if (acts.size() != n_layers) root.at("activations").fail("expected one entry per layer");
        std::vector<DenseLayer> layers;
        for (std::size_t l = 0; l < n_layers; ++l) {
            const auto expected = l + 1 < n_layers ? "sigmoid" : "linear";
            if (acts.at(l).text() != expected) acts.at(l).fail(std::string("expected '") + expected + "'");
            DenseLayer L{sizes.at(l).count(), sizes.at(l + 1).count(), weights.at(l).reals(), biases.at(l).reals()};
            if (L.weights.size() != L.inputs * L.outputs) weights.at(l).fail("wrong length for layer shape");
            if (L.biases.size() != L.outputs) biases.at(l).fail("wrong length for layer shape");
            layers.push_back(std::move(L));
        }
        return Mlp(std::move(layers));
    }
    root.at("kind").fail("unknown model kind '" + kind + "'");
}

}  // namespace

std::string_view model_kind(const Model& m) noexcept {
    switch (m.index()) {
        case 0:
        case 1: return "cc4";
        case 2: return "fc";
        default: return "mlp";
    }
}

std::string dump_model(const Model& m, int indent) { return to_json(m).dump(indent); }

Model parse_model(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("model JSON: parse error: ") + e.what());
    }
    return from_json(j);
}

void save_model(const Model& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    os << dump_model(m, 1) << '\n';
    if (!os) throw Error("write failed for '" + path + "'");
}

Model load_model(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_model(ss.str());
}

}  // namespace hybridnet
