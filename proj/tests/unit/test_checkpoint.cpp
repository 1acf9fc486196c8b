#include <doctest.h>

#include <filesystem>
#include <string>

#include "geoflow/checkpoint.hpp"
#include "geoflow/errors.hpp"

using namespace geoflow;
namespace fs = std::filesystem;

namespace {

ModelConfig small_config() {
    ModelConfig cfg;
    cfg.regnet.width = 4;
    cfg.regnet.latent_channels = 3;
    cfg.gno.latent_channels = 3;
    cfg.gno.hidden_channels = 5;
    cfg.gno.layers = 2;
    cfg.gno.modes = 3;
    cfg.shooting.steps = 7;
    cfg.shooting.integrator = Integrator::Euler;
    cfg.shooting.alpha = 1.5;
    return cfg;
}

FormatError::Kind decode_kind(const std::string &bytes) {
    try {
        decode_checkpoint(bytes);
    } catch (const FormatError &e) {
        return e.kind();
    }
    FAIL("decode succeeded");
    return FormatError::Kind::Io;
}

} // namespace

TEST_SUITE("checkpoint") {

TEST_CASE("model round trips bit-exactly with its configuration") {
    const Model m = Model::init(small_config(), 42);
    const Checkpoint c = decode_checkpoint(encode_checkpoint(m, R"({"epoch": 3})"));
    CHECK(c.model.flatten() == m.flatten());
    CHECK(c.model.config.shooting.steps == 7);
    CHECK(c.model.config.shooting.integrator == Integrator::Euler);
    CHECK(c.model.config.shooting.alpha == 1.5);
    CHECK(c.model.config.gno.modes == 3);
    CHECK(c.model.config.regnet.width == 4);
    CHECK(c.extra_json.find("\"epoch\"") != std::string::npos);

    const fs::path p = fs::temp_directory_path() / "geoflow_test_ckpt.gfck";
    save_checkpoint(p, m);
    CHECK(load_checkpoint(p).model.flatten() == m.flatten());
    fs::remove(p);
}

TEST_CASE("configuration JSON round trip") {
    const ModelConfig cfg = small_config();
    const ModelConfig back = model_config_from_json(model_config_to_json(cfg));
    CHECK(model_config_to_json(back) == model_config_to_json(cfg));
    CHECK_THROWS_AS(model_config_from_json("{}"), FormatError);
}

TEST_CASE("malformed checkpoints are classified") {
    const std::string good = encode_checkpoint(Model::init(small_config(), 1));
    std::string bad = good;
    bad[1] = 'X';
    CHECK(decode_kind(bad) == FormatError::Kind::BadMagic);
    bad = good;
    bad[4] = 9;
    CHECK(decode_kind(bad) == FormatError::Kind::BadVersion);
    CHECK(decode_kind(good.substr(0, good.size() - 3)) == FormatError::Kind::Truncated);
    CHECK(decode_kind(good.substr(0, 6)) == FormatError::Kind::Truncated);
    CHECK_THROWS_AS(load_checkpoint(fs::temp_directory_path() / "geoflow_test_none.gfck"), FormatError);
}

}
