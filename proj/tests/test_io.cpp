#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "cno/bench.hpp"
#include "cno/io.hpp"

using namespace cno;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("cno_test_io_" + name);
    fs::remove_all(p);
    return p;
}

causal::Construction small_model() {
    const auto ds = bench::recursive_dataset({4, bench::GKind::Mean}, 32, 1, 2);
    causal::ConstructOptions o;
    o.hidden = {5};
    o.train.epochs = 20;
    o.seed = 17;
    return causal::construct_cno(ds, o);
}

}  // namespace

TEST_CASE("sha256 of known strings") {
    CHECK(io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("space descriptors round-trip") {
    for (const auto& s : {spaces::SchauderSpace::euclidean(3), spaces::SchauderSpace::weighted_sequence(),
                          spaces::SchauderSpace::fourier_l2(2.5, 128), spaces::SchauderSpace::chaos_l2(8, 1.25)}) {
        CHECK(io::space_from_json(io::space_to_json(s)).tag() == s.tag());
    }
    auto j = io::space_to_json(spaces::SchauderSpace::euclidean(3));
    j["dim"] = 4;
    CHECK_THROWS_AS(io::space_from_json(j), IntegrityError);
    CHECK_THROWS_AS(io::space_from_json(io::json{{"kind", "euclidean"}}), IntegrityError);
}

TEST_CASE("bundles round-trip") {
    const auto c = small_model();
    const auto dir = scratch("roundtrip");
    io::write_bundle(dir.string(), c.model, {{"note", "unit"}});
    for (const char* f : {"manifest.json", "weave.bin", "spaces.json"}) CHECK(fs::exists(dir / f));
    const auto m = io::read_bundle(dir.string());
    CHECK(m.weave == c.model.weave);
    CHECK(m.synced_spec == c.model.synced_spec);
    CHECK(m.grid.times == c.model.grid.times);
    CHECK(m.M == c.model.M);
    CHECK(m.in_dim == c.model.in_dim);
    CHECK(m.n_out == c.model.n_out);
    CHECK(m.out_space.tag() == c.model.out_space.tag());
    const std::vector<std::vector<double>> x{{0.1}, {0.9}, {0.4}, {0.3}};
    CHECK(causal::predict(m, x, 4) == causal::predict(c.model, x, 4));

    const auto manifest = io::json::parse(io::read_file((dir / "manifest.json").string()));
    CHECK(manifest["schema_version"] == 1);
    CHECK(manifest["run"]["note"] == "unit");
    CHECK(manifest["window_seeds"].size() == 4);
    CHECK(manifest["window_seeds"][0] == causal::window_seed(17, 1));
    fs::remove_all(dir);
}

TEST_CASE("corrupted or unknown bundles are rejected") {
    const auto c = small_model();
    const auto dir = scratch("corrupt");
    io::write_bundle(dir.string(), c.model);

    auto bytes = io::read_file((dir / "weave.bin").string());
    bytes[bytes.size() / 2] ^= 0x01;
    io::write_file((dir / "weave.bin").string(), bytes);
    try {
        io::read_bundle(dir.string());
        FAIL("expected an integrity error");
    } catch (const IntegrityError& e) {
        CHECK(std::string(e.what()).find("weave.bin") != std::string::npos);
    }

    io::write_bundle(dir.string(), c.model);
    fs::remove(dir / "spaces.json");
    CHECK_THROWS_AS(io::read_bundle(dir.string()), IntegrityError);

    io::write_bundle(dir.string(), c.model);
    auto manifest = io::json::parse(io::read_file((dir / "manifest.json").string()));
    manifest["schema_version"] = 2;
    io::write_file((dir / "manifest.json").string(), manifest.dump());
    try {
        io::read_bundle(dir.string());
        FAIL("expected an integrity error");
    } catch (const IntegrityError& e) {
        CHECK(std::string(e.what()).find("schema_version") != std::string::npos);
    }

    io::write_file((dir / "manifest.json").string(), "{not json");
    CHECK_THROWS_AS(io::read_bundle(dir.string()), IntegrityError);
    fs::remove_all(dir);
}

TEST_CASE("inspect reports dims and the parameter count") {
    const auto c = small_model();
    const auto dir = scratch("inspect");
    io::write_bundle(dir.string(), c.model);
    const auto s = io::inspect_bundle(dir.string());
    CHECK(s["P"] == net::param_count(c.model.synced_spec));
    CHECK(s["dims"].get<std::vector<std::size_t>>() == c.model.synced_spec.dims);
    CHECK(s["I"] == 16);
    CHECK(s["T"] == 4);
    CHECK(s["packing"]["points"] == 4);
    CHECK(s["table2"]["width"].get<std::size_t>() <= s["table2"]["width_bound"].get<std::size_t>());
    const auto text = io::format_inspect(s);
    CHECK(text.find("P([d*])") != std::string::npos);
    CHECK(text.find("integrity   ok") != std::string::npos);
    fs::remove_all(dir);
}
