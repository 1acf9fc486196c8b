#include "geoflow/checkpoint.hpp"

#include <map>

#include <json.hpp>

#include "geoflow/atomic_file.hpp"
#include "geoflow/byte_codec.hpp"
#include "geoflow/errors.hpp"

namespace geoflow {
namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "GFCK";

json config_json(const ModelConfig &cfg) {
    return {
        {"regnet",
         {{"width", cfg.regnet.width},
          {"latent_channels", cfg.regnet.latent_channels},
          {"output_init_scale", cfg.regnet.output_init_scale},
          {"output_alpha", cfg.regnet.output_alpha},
          {"output_exponent", cfg.regnet.output_exponent}}},
        {"gno",
         {{"latent_channels", cfg.gno.latent_channels},
          {"hidden_channels", cfg.gno.hidden_channels},
          {"layers", cfg.gno.layers},
          {"modes", cfg.gno.modes},
          {"sigma_alpha", cfg.gno.sigma_alpha},
          {"sigma_exponent", cfg.gno.sigma_exponent},
          {"identity_init", cfg.gno.identity_init},
          {"init_noise", cfg.gno.init_noise}}},
        {"shooting",
         {{"steps", cfg.shooting.steps},
          {"alpha", cfg.shooting.alpha},
          {"exponent", cfg.shooting.exponent},
          {"integrator", cfg.shooting.integrator == Integrator::RK4 ? "rk4" : "euler"},
          {"cell_size", cfg.shooting.cell_size}}},
    };
}

ModelConfig parse_config(const json &j) {
    ModelConfig cfg;
    const json &r = j.at("regnet");
    cfg.regnet.width = r.at("width").get<int>();
    cfg.regnet.latent_channels = r.at("latent_channels").get<int>();
    cfg.regnet.output_init_scale = r.at("output_init_scale").get<double>();
    cfg.regnet.output_alpha = r.at("output_alpha").get<double>();
    cfg.regnet.output_exponent = r.at("output_exponent").get<int>();
    const json &g = j.at("gno");
    cfg.gno.latent_channels = g.at("latent_channels").get<int>();
    cfg.gno.hidden_channels = g.at("hidden_channels").get<int>();
    cfg.gno.layers = g.at("layers").get<int>();
    cfg.gno.modes = g.at("modes").get<int>();
    cfg.gno.sigma_alpha = g.at("sigma_alpha").get<double>();
    cfg.gno.sigma_exponent = g.at("sigma_exponent").get<int>();
    cfg.gno.identity_init = g.at("identity_init").get<bool>();
    cfg.gno.init_noise = g.at("init_noise").get<double>();
    const json &s = j.at("shooting");
    cfg.shooting.steps = s.at("steps").get<int>();
    cfg.shooting.alpha = s.at("alpha").get<double>();
    cfg.shooting.exponent = s.at("exponent").get<int>();
    const std::string integ = s.at("integrator").get<std::string>();
    if (integ == "euler") {
        cfg.shooting.integrator = Integrator::Euler;
    } else if (integ == "rk4") {
        cfg.shooting.integrator = Integrator::RK4;
    } else {
        throw FormatError(FormatError::Kind::Schema, "unknown integrator '" + integ + "'");
    }
    cfg.shooting.cell_size = s.at("cell_size").get<double>();
    return cfg;
}

struct Tensor {
    bool complex = false;
    std::vector<std::uint64_t> dims;
    std::vector<double> data;
};

} // namespace

std::string model_config_to_json(const ModelConfig &cfg) { return config_json(cfg).dump(2); }

ModelConfig model_config_from_json(std::string_view text) {
    try {
        return parse_config(json::parse(text));
    } catch (const json::exception &e) {
        throw FormatError(FormatError::Kind::Schema, std::string("model config: ") + e.what());
    }
}

std::string encode_checkpoint(const Model &model, std::string_view extra_json) {
    json meta;
    meta["format"] = "geoflow-checkpoint";
    meta["model"] = config_json(model.config);
    try {
        meta["extra"] = json::parse(extra_json);
    } catch (const json::exception &e) {
        throw std::invalid_argument(std::string("checkpoint extra metadata is not JSON: ") + e.what());
    }
    const std::string meta_text = meta.dump();

    std::string out;
    out.append(kMagic);
    bytes::put<std::uint32_t>(out, kCheckpointVersion);
    bytes::put<std::uint64_t>(out, meta_text.size());
    out.append(meta_text);
    std::uint32_t count = 0;
    model.visit([&count](const std::string &, auto, const auto &, bool) { ++count; });
    bytes::put<std::uint32_t>(out, count);
    model.visit([&out](const std::string &name, auto values, const std::vector<std::size_t> &shape, bool complex) {
        bytes::put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out.append(name);
        bytes::put<std::uint8_t>(out, complex ? 1 : 0);
        bytes::put<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
        for (std::size_t d : shape) bytes::put<std::uint64_t>(out, d);
        for (double v : values) bytes::put<double>(out, v);
    });
    return out;
}

Checkpoint decode_checkpoint(std::string_view data, const std::string &what) {
    bytes::Reader r(data, what);
    if (r.remaining() < 4 || r.take(4) != kMagic) throw FormatError(FormatError::Kind::BadMagic, what + ": not a GFCK file");
    const auto version = r.get<std::uint32_t>();
    if (version != kCheckpointVersion) {
        throw FormatError(FormatError::Kind::BadVersion, what + ": unsupported checkpoint version " + std::to_string(version));
    }
    const auto meta_len = r.get<std::uint64_t>();
    if (meta_len > r.remaining()) r.need(meta_len);
    json meta;
    try {
        meta = json::parse(r.take(meta_len));
    } catch (const json::exception &e) {
        throw FormatError(FormatError::Kind::Schema, what + ": bad metadata: " + e.what());
    }

    Checkpoint ck;
    try {
        const ModelConfig cfg = parse_config(meta.at("model"));
        cfg.validate();
        ck.model = Model::init(cfg, 0);
        ck.extra_json = meta.contains("extra") ? meta.at("extra").dump() : "{}";
    } catch (const json::exception &e) {
        throw FormatError(FormatError::Kind::Schema, what + ": bad model config: " + e.what());
    } catch (const std::invalid_argument &e) {
        throw FormatError(FormatError::Kind::Schema, what + ": bad model config: " + e.what());
    }

    std::map<std::string, Tensor> tensors;
    const auto count = r.get<std::uint32_t>();
    for (std::uint32_t t = 0; t < count; ++t) {
        const auto name_len = r.get<std::uint32_t>();
        std::string name(r.take(name_len));
        Tensor tensor;
        tensor.complex = r.get<std::uint8_t>() != 0;
        const auto rank = r.get<std::uint32_t>();
        if (rank > 8) throw FormatError(FormatError::Kind::DimOverflow, what + ": tensor rank too large");
        std::uint64_t n = tensor.complex ? 2 : 1;
        for (std::uint32_t k = 0; k < rank; ++k) {
            tensor.dims.push_back(r.get<std::uint64_t>());
            if (tensor.dims.back() > (std::uint64_t(1) << 32) || n * tensor.dims.back() > (std::uint64_t(1) << 32)) {
                throw FormatError(FormatError::Kind::DimOverflow, what + ": tensor '" + name + "' too large");
            }
            n *= tensor.dims.back();
        }
        r.need(n * sizeof(double));
        tensor.data.resize(n);
        for (double &v : tensor.data) v = r.get<double>();
        tensors.emplace(std::move(name), std::move(tensor));
    }

    ck.model.visit([&](const std::string &name, std::span<double> dst, const std::vector<std::size_t> &shape, bool complex) {
        const auto it = tensors.find(name);
        if (it == tensors.end()) throw FormatError(FormatError::Kind::Schema, what + ": missing tensor '" + name + "'");
        const Tensor &t = it->second;
        const bool same_shape = t.complex == complex && t.dims.size() == shape.size() &&
                                std::equal(shape.begin(), shape.end(), t.dims.begin());
        if (!same_shape || t.data.size() != dst.size()) {
            throw FormatError(FormatError::Kind::Schema, what + ": tensor '" + name + "' has the wrong shape");
        }
        std::copy(t.data.begin(), t.data.end(), dst.begin());
    });
    return ck;
}

void save_checkpoint(const std::filesystem::path &path, const Model &model, std::string_view extra_json) {
    write_file_atomic(path, encode_checkpoint(model, extra_json));
}

Checkpoint load_checkpoint(const std::filesystem::path &path) { return decode_checkpoint(read_file(path), path.string()); }

} // namespace geoflow
