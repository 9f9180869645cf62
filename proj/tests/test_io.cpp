#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <string>

#include "latvar/io.hpp"

using namespace latvar;

namespace {

// unique-ish temp path in the working directory, removed by each test
std::string temp_path(const char* stem) {
  return std::string("io_test_") + stem + ".tmp";
}

struct FileGuard {
  std::string path;
  explicit FileGuard(std::string p) : path(std::move(p)) {}
  ~FileGuard() { std::remove(path.c_str()); }
};

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("grid csv round trip keeps negative coordinates and phases") {
    GridFunction f(2);
    f.set(Point::of({-3, 7}), cplx{1.25, -0.5});
    f.set(Point::of({0, 0}), cplx{-2.0, 0.125});
    f.set(Point::of({4, -1}), cplx{0.0, 3.0});
    const FileGuard tmp(temp_path("grid"));
    write_grid_csv(tmp.path, f, "deadbeef");
    const std::string text = read_text_file(tmp.path);
    CHECK(text.find("# manifest=deadbeef") == 0);
    CHECK(text.find("x1,x2,re,im") != std::string::npos);
    const GridFunction back = read_grid_csv(tmp.path);
    CHECK(back.dim() == 2);
    CHECK(max_abs_diff(f, back) == 0.0);
  }

  TEST_CASE("field csv matches grid csv for the same data") {
    GridFunction f(1);
    f.set(Point::of({-1}), cplx{0.5, 0.5});
    f.set(Point::of({2}), cplx{1.0, 0.0});
    const FileGuard a(temp_path("field_a"));
    const FileGuard b(temp_path("field_b"));
    write_grid_csv(a.path, f);
    write_field_csv(b.path, SortedField::from_grid(f));
    CHECK(read_text_file(a.path) == read_text_file(b.path));
  }

  TEST_CASE("points csv lists rows in order") {
    const FileGuard tmp(temp_path("points"));
    write_points_csv(tmp.path, {Point::of({1, 2}), Point::of({3, -4})}, 2);
    CHECK(read_text_file(tmp.path) == "x1,x2\n1,2\n3,-4\n");
  }

  TEST_CASE("sequence csv round trip and header validation") {
    SampleSequence seq;
    seq.index = {1.0, 2.0, 4.5};
    seq.value = {cplx{0.5, 0.0}, cplx{-1.0, 0.25}, cplx{0.0, -2.0}};
    const FileGuard tmp(temp_path("seq"));
    write_sequence_csv(tmp.path, seq, "cafe");
    const SampleSequence back = read_sequence_csv(tmp.path);
    REQUIRE(back.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
      CHECK(back.index[i] == seq.index[i]);
      CHECK(back.value[i] == seq.value[i]);
    }
    const FileGuard bad(temp_path("seq_bad"));
    write_text_file(bad.path, "wrong,header,names\n1,2,3\n");
    CHECK_THROWS_AS(read_sequence_csv(bad.path), ValidationError);
  }

  TEST_CASE("key=value parsing") {
    const KeyValueConfig kv = KeyValueConfig::from_string(
        "# comment line\n"
        "alpha = 3\n"
        "beta=2.5\n"
        "flag = true\n"
        "name = five_squares \n"
        "list = 1, 2, 3\n"
        "reals = 0.5,1.5\n");
    CHECK(kv.has("alpha"));
    CHECK_FALSE(kv.has("missing"));
    CHECK(kv.get_int("alpha", 0) == 3);
    CHECK(kv.get_int("missing", 9) == 9);
    CHECK(kv.get_double("beta", 0.0) == 2.5);
    CHECK(kv.get_bool("flag", false));
    CHECK(kv.get_string("name", "") == "five_squares");
    CHECK(kv.get_int_list("list") == std::vector<int64_t>{1, 2, 3});
    CHECK(kv.get_double_list("reals") == std::vector<double>{0.5, 1.5});
    CHECK(kv.require_string("name") == "five_squares");
    CHECK_THROWS_AS(kv.require_string("missing"), ValidationError);
    CHECK_THROWS_AS(kv.get_int("beta", 0), ValidationError);
    CHECK_THROWS_AS(KeyValueConfig::from_string("a=1\na=2\n"), ValidationError);
    CHECK_THROWS_AS(KeyValueConfig::from_string("no_equals_sign\n"), ValidationError);
  }

  TEST_CASE("experiment config from key=value text") {
    const KeyValueConfig kv = KeyValueConfig::from_string(
        "form.coeffs = 1,1\n"
        "form.degree = 2\n"
        "ratio = 1.5\n"
        "start = 2\n"
        "count = 5\n"
        "ensemble.kind = delta\n"
        "ensemble.members = 3\n"
        "ensemble.seed = 11\n"
        "r = 4\n"
        "p = 2\n"
        "variety = false\n"
        "window = 48\n");
    const ExperimentConfig cfg = experiment_config_from_kv(kv);
    CHECK(cfg.form.n == 2);
    CHECK(cfg.form.d == 2);
    CHECK(cfg.ratio == 1.5);
    CHECK(cfg.start == 2);
    CHECK(cfg.count == 5);
    CHECK(cfg.ensemble.kind == EnsembleKind::kDelta);
    CHECK(cfg.ensemble.members == 3);
    CHECK(cfg.ensemble.seed == 11);
    CHECK(cfg.r == 4.0);
    CHECK(cfg.window == 48);
    CHECK_FALSE(cfg.variety);
    // defaults survive when keys are absent
    const ExperimentConfig defaults = experiment_config_from_kv(KeyValueConfig::from_string(""));
    CHECK(defaults.form.n == 5);
    CHECK(defaults.count == 4);
  }

  TEST_CASE("manifests render stable sorted json") {
    RunManifest m;
    m.tool_version = "latvar 1.0.0";
    m.subcommand = "ops";
    m.seed = 5;
    m.config["zeta"] = "1";
    m.config["alpha"] = "2";
    m.outputs = {"out.csv"};
    const std::string j1 = m.to_json();
    const std::string j2 = m.to_json();
    CHECK(j1 == j2);
    CHECK(j1.find("\"alpha\"") < j1.find("\"zeta\""));
    const uint64_t h = m.hash();
    m.config["alpha"] = "3";
    CHECK(m.hash() != h);
    CHECK(m.hash_hex().size() == 16);

    const nlohmann::json parsed = nlohmann::json::parse(j1);
    CHECK(parsed["schema_version"] == 1);
    CHECK(parsed["subcommand"] == "ops");
    CHECK(parsed["seed"] == 5);
  }

  TEST_CASE("error records are one-line json") {
    const std::string rec = error_record_json("validation", "bad flag");
    CHECK(rec.find('\n') == std::string::npos);
    const nlohmann::json parsed = nlohmann::json::parse(rec);
    CHECK(parsed["error"] == "validation");
    CHECK(parsed["message"] == "bad flag");
  }

  TEST_CASE("experiment reports embed the manifest and its hash") {
    RunManifest m;
    m.tool_version = "latvar 1.0.0";
    m.subcommand = "experiment";
    Report rep;
    rep.experiment = "variation_norm";
    rep.lambdas = {1, 2, 4};
    rep.ratios = {0.5, 0.25};
    rep.max_ratio = 0.5;
    rep.median_ratio = 0.375;
    rep.q90_ratio = 0.5;
    rep.c_constant = 2.5;
    rep.eta_constant = 1.0 / 48.0;
    rep.notes = {"a note"};
    const nlohmann::json parsed = nlohmann::json::parse(experiment_report_json(m, rep, true));
    CHECK(parsed["manifest_hash"] == m.hash_hex());
    CHECK(parsed["metrics"]["experiment"] == "variation_norm");
    CHECK(parsed["metrics"]["max_ratio"] == 0.5);
    CHECK(parsed["metrics"]["lambdas"].size() == 3);
    CHECK(parsed["references"]["c"] == 2.5);
    CHECK(parsed["pass"] == true);
  }

  TEST_CASE("text file round trip") {
    const FileGuard tmp(temp_path("text"));
    write_text_file(tmp.path, "line1\nline2\n");
    CHECK(read_text_file(tmp.path) == "line1\nline2\n");
    CHECK_THROWS_AS(read_text_file("definitely_missing_file.tmp"), ValidationError);
  }
}
