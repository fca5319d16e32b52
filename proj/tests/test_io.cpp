#include "gradhom/commands.hpp"
#include "gradhom/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace gradhom;

namespace {

const fs::path kData = fs::path(GRADHOM_SOURCE_DIR) / "data";

fs::path scratch(const std::string &name) {
    const auto dir = fs::temp_directory_path() / "gradhom_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

GlobalOptions in(const fs::path &dir) {
    GlobalOptions o;
    o.out_dir = dir;
    return o;
}

void check_same(const CoefficientField &a, const CoefficientField &b) {
    REQUIRE(a.grid() == b.grid());
    CHECK(std::equal(a.K_all().begin(), a.K_all().end(), b.K_all().begin()));
    CHECK(std::equal(a.S_all().begin(), a.S_all().end(), b.S_all().begin()));
    CHECK(std::equal(a.A_all().begin(), a.A_all().end(), b.A_all().begin()));
}

} // namespace

TEST_SUITE("cli_io") {

TEST_CASE("tensor JSON round trip") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    Tensor6 A(2);
    for (double &v : A.data())
        v = n(rng);
    const auto j = to_json(A);
    CHECK(j.at("index_order") == "ijk,nlp");
    const auto back = tensor6_from_json(j);
    CHECK(std::equal(A.data().begin(), A.data().end(), back.data().begin()));
    const auto K = make_isotropic_K(1.0, 2.0, 3);
    const auto K2 = tensor4_from_json(json::parse(to_json(K).dump()));
    CHECK(std::equal(K.data().begin(), K.data().end(), K2.data().begin()));
    CHECK_THROWS_AS(tensor4_from_json(json{{"d", 2}}), ConfigError);
}

TEST_CASE("make-cell on the shipped specs") {
    const auto dir = scratch("make_cell");
    for (const char *name : {"constant2d", "laminate1d", "chiral_inclusion2d"}) {
        const auto spec = kData / "cells" / (std::string(name) + ".json");
        cmd_make_cell(spec, std::string(name) + ".field", in(dir));
        const auto loaded = read_field(dir / (std::string(name) + ".field"));
        check_same(loaded, build_cell_file(spec));
        CHECK_NOTHROW(loaded.validate());
    }
}

TEST_CASE("corrector container round trip") {
    const auto dir = scratch("correctors");
    const auto field = build_cell_file(kData / "cells" / "laminate2d.json");
    const auto hs1 = solve_all_hs1(field, SolverParams{});
    write_correctors(dir / "c.bin", hs1);
    const auto back = std::get<CorrectorHS1>(read_correctors(dir / "c.bin"));
    REQUIRE(back.phi.size() == hs1.phi.size());
    for (size_t i = 0; i < hs1.phi.size(); ++i) {
        CHECK(back.phi[i].data == hs1.phi[i].data);
        CHECK(back.stats[i].residual == hs1.stats[i].residual);
        CHECK(back.stats[i].iterations == hs1.stats[i].iterations);
    }
    write_text(dir / "junk.bin", "not a container");
    CHECK_THROWS_AS(read_correctors(dir / "junk.bin"), ConfigError);
    CHECK_THROWS_AS(read_field(dir / "c.bin"), ConfigError);
}

TEST_CASE("unknown keys are rejected with a position") {
    const std::string text = "{\n  \"d\": 1,\n  \"N\": 16,\n  \"colour\": 3\n}";
    auto cfg = ConfigReader::from_text(text, "spec.json");
    CHECK(cfg.integer("d") == 1);
    CHECK(cfg.integer("N") == 16);
    try {
        cfg.finish();
        FAIL("expected a config error");
    } catch (const ConfigError &e) {
        const std::string msg = e.what();
        CHECK(msg.find("colour") != std::string::npos);
        CHECK(msg.find("spec.json:4") != std::string::npos);
    }
    try {
        parse_json_text("{\n  \"d\": 1,\n  oops\n}", "bad.json");
        FAIL("expected a parse error");
    } catch (const ConfigError &e) {
        CHECK(std::string(e.what()).find("bad.json:3") != std::string::npos);
    }
    auto typed = ConfigReader::from_text("{\"d\": \"one\"}", "t.json");
    CHECK_THROWS_AS(typed.integer("d"), ConfigError);
    auto missing = ConfigReader::from_text("{}", "m.json");
    CHECK_THROWS_AS(missing.number("eps"), ConfigError);
    CHECK(missing.number("eps", 0.5) == 0.5);
}

TEST_CASE("config round trip is idempotent") {
    const auto text = read_text(kData / "cells" / "chiral_inclusion2d.json");
    const auto once = parse_json_text(text, "a").dump(2);
    const auto twice = parse_json_text(once, "b").dump(2);
    CHECK(once == twice);
}

TEST_CASE("long-format export") {
    const auto dir = scratch("export");
    Table t{{"epsilon", "l2_error", "h1_error"}, {{0.125, 1.0, 2.0}, {0.0625, 0.5, 1.0}, {0.03125, 0.25, 0.5}}};
    write_csv(dir / "table.csv", t);
    cmd_export_plotdata(dir / "table.csv", {"l2_error", "h1_error"}, "long.csv", in(dir));
    const auto raw = read_text(dir / "long.csv");
    CHECK(raw.rfind("epsilon,metric,value\n", 0) == 0);
    CHECK(std::count(raw.begin(), raw.end(), '\n') == 7);
    CHECK(raw.find("0.0625,l2_error,0.5\n") != std::string::npos);
    CHECK(raw.find("0.03125,h1_error,0.5\n") != std::string::npos);

    const auto back = read_csv(dir / "table.csv");
    CHECK(back.rows == t.rows);

    write_csv(dir / "empty.csv", Table{{"epsilon", "l2_error"}, {}});
    cmd_export_plotdata(dir / "empty.csv", {}, "empty_long.csv", in(dir));
    CHECK(read_text(dir / "empty_long.csv") == "epsilon,metric,value\n");

    CHECK_THROWS_AS(cmd_export_plotdata(dir / "table.csv", {"missing"}, "x.csv", in(dir)), ConfigError);
}

TEST_CASE("exit codes") {
    CHECK(exit_code_for(ConfigError("x")) == 2);
    CHECK(exit_code_for(SolverError("x", {})) == 3);
    CHECK(exit_code_for(CoercivityError("x", -1.0)) == 4);
    CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("pipeline on a constant cell reproduces K") {
    const auto dir = scratch("pipeline_constant");
    const auto cfg = dir / "run.json";
    write_text(cfg, R"({
  "regime": "hs1",
  "epsilon": 0.25,
  "cell_spec": ")" + (kData / "cells" / "constant2d.json").string() + R"("
})");
    const auto manifest_path = cmd_pipeline(cfg, in(dir));
    const auto manifest = json::parse(read_text(manifest_path));
    CHECK(manifest.at("regime") == "HS1");
    const auto eff = json::parse(read_text(dir / "eff.json"));
    const auto K = tensor4_from_json(eff.at("K_eff"));
    const auto expected = build_cell_file(kData / "cells" / "constant2d.json").K_at(0);
    for (size_t i = 0; i < K.size(); ++i)
        CHECK(K.data()[i] == doctest::Approx(expected.data()[i]).epsilon(1e-14));
    for (const auto &[name, digest] : manifest.at("outputs").items())
        CHECK(digest == file_sha256(dir / name));
}

TEST_CASE("pipeline reruns are byte-identical") {
    const auto a = scratch("pipeline_a"), b = scratch("pipeline_b");
    const auto cfg = kData / "pipeline" / "laminate1d_hs1.json";
    const auto ma = json::parse(read_text(cmd_pipeline(cfg, in(a))));
    const auto mb = json::parse(read_text(cmd_pipeline(cfg, in(b))));
    CHECK(ma.at("outputs") == mb.at("outputs"));
    CHECK(read_text(a / "manifest.json") == read_text(b / "manifest.json"));
    const auto eff = json::parse(read_text(a / "eff.json"));
    CHECK(tensor4_from_json(eff.at("K_eff"))(0, 0, 0, 0) > 1.6);
}

TEST_CASE("pipeline config errors name the key") {
    const auto dir = scratch("pipeline_bad");
    write_text(dir / "bad.json", "{\n  \"regime\": \"hs1\",\n  \"epsilon\": 0.25,\n  \"cell_spec\": \"x.json\",\n  \"typo\": 1\n}");
    try {
        cmd_pipeline(dir / "bad.json", in(dir));
        FAIL("expected a config error");
    } catch (const ConfigError &e) {
        CHECK(std::string(e.what()).find("typo") != std::string::npos);
    }
}

} // TEST_SUITE
