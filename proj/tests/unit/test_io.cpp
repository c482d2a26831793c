#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gwrdp/app.hpp"

using namespace gwrdp;

namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::vector<const char*> argv{"gwrdp"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gwrdp_io_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("csv numbers use six significant digits") {
  CHECK(csv_number(0.123456789) == "0.123457");
  CHECK(csv_number(1.0) == "1");
  CHECK(csv_number(kUnbounded) == "inf");
}

TEST_CASE("unbounded values round trip as strings") {
  CHECK(number_or_inf(kUnbounded) == Json("inf"));
  CHECK(std::isinf(parse_number_or_inf(Json("inf"), "p")));
  CHECK(parse_number_or_inf(Json(0.25), "p") == 0.25);
  CHECK_THROWS_AS(parse_number_or_inf(Json("x"), "p"), ConfigError);
}

TEST_CASE("parsers accept both forms and name bad fields") {
  CHECK(parse_pmf(Json::parse("[0.5, 0.5]"), "s") == parse_pmf(Json::parse(R"({"probs":[0.5,0.5]})"), "s"));
  const JointPmf j = parse_joint(Json::parse("[[0.1,0.2],[0.3,0.4]]"), "p");
  CHECK(j.shape() == std::vector<std::size_t>{2, 2});
  CHECK(j.probs()[1] == 0.2);
  try {
    parse_pmf(Json::parse("[0.5, 0.6]"), "source");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("source") != std::string::npos);
  }
  CHECK(parse_distortion(Json("hamming"), 3, "d") == DistortionMatrix::hamming(3));
}

TEST_CASE("codebook and omega serialization round trip") {
  const JointPmf p = parse_joint(Json::parse("[[0.45,0.05],[0.05,0.45]]"), "p");
  const auto scheme = CodingScheme::build(p, Kernel::constant(4, Pmf({1.0})), Kernel::identity(2),
                                          Kernel::identity(2), DistortionMatrix::hamming(2),
                                          DistortionMatrix::hamming(2));
  CodeSizes s;
  s.m1 = 3;
  s.m2 = 2;
  s.n = 6;
  s.delta = 0.5;
  const Codebook cb = generate_codebook(scheme, s, 3, 1 << 20);
  CHECK(codebook_from_json(to_json(cb)) == cb);
  const OmegaMap om = build_omega(p, 3, 6);
  CHECK(omega_from_json(to_json(om)) == om);
}

TEST_CASE("command line exit codes and manifests") {
  const fs::path dir = scratch("cli");
  write(dir / "ok.json", R"({"source":[0.5,0.5],"d_budget":0.1,"p_budget":0.05})");
  write(dir / "bad.json", R"({"source":[0.5,0.5]})");
  write(dir / "slow.json",
        R"({"q_xw":[[0.3,0.1],[0.15,0.45]],"d_budget":0.08,"p_budget":0.05,"solver":{"max_iterations":2}})");
  write(dir / "big.json",
        R"({"p_xy":[[0.25,0.25],[0.25,0.25]],"budgets":{"d1":0.1,"d2":0.1},"n":64,"delta":0.1,"trials":1})");

  CHECK(run({"rdp", "--config", (dir / "ok.json").string(), "--out-dir", (dir / "a").string()}) == 0);
  const Json doc = Json::parse(slurp(dir / "a" / "rdp_result.json"));
  const Json& m = doc.at("manifest");
  CHECK(m.at("subcommand") == "rdp");
  CHECK(m.at("version") == kVersion);
  CHECK(m.at("input_hashes").at("config") == fnv1a_hex(slurp(dir / "ok.json")));
  CHECK(m.at("outputs").size() == 1);

  std::string text;
  CHECK(run({"rdp", "--config", (dir / "bad.json").string(), "--out-dir", (dir / "b").string()},
            &text) == 2);
  CHECK(text.find("d_budget") != std::string::npos);
  CHECK(run({"rdp", "--config", (dir / "missing.json").string()}) == 2);
  CHECK(run({"rdp", "--config", (dir / "slow.json").string(), "--out-dir", (dir / "c").string()}) == 4);
  CHECK(fs::exists(dir / "c" / "rdp_result.json"));
  CHECK(run({"simulate", "--config", (dir / "big.json").string(), "--out-dir", (dir / "d").string(),
             "--memory-cap", "1000"}) == 3);
}

TEST_CASE("serial and parallel runs write identical bytes") {
  const fs::path dir = scratch("parallel");
  write(dir / "sim.json",
        R"({"p_xy":[[0.45,0.05],[0.05,0.45]],"budgets":{"d1":0.3,"d2":0.3,"p1":0,"p2":0},"delta":0.15,"n":12,"trials":300,"seed":9})");
  write(dir / "reg.json",
        R"({"p_xy":[[0.45,0.05],[0.05,0.45]],"budgets":{"d1":0.1,"d2":0.1},"samples":3,"local_sweeps":1,"strategy":"random","seed":9})");
  for (const char* cmd : {"simulate", "region"}) {
    const std::string cfg = (dir / (std::string(cmd) == "simulate" ? "sim.json" : "reg.json")).string();
    const fs::path out = dir / "out";
    fs::remove_all(out);
    REQUIRE(run({cmd, "--config", cfg, "--out-dir", out.string(), "--parallel", "1"}) == 0);
    std::vector<std::string> serial;
    for (const auto& e : fs::directory_iterator(out)) serial.push_back(slurp(e.path()));
    fs::remove_all(out);
    REQUIRE(run({cmd, "--config", cfg, "--out-dir", out.string(), "--parallel", "4"}) == 0);
    std::vector<std::string> parallel;
    for (const auto& e : fs::directory_iterator(out)) parallel.push_back(slurp(e.path()));
    std::sort(serial.begin(), serial.end());
    std::sort(parallel.begin(), parallel.end());
    CHECK(serial == parallel);
  }
}
