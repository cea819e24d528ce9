#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "qcompat/state_io.hpp"

using namespace qcompat;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) { return fs::temp_directory_path() / ("qcompat_cli_" + name); }

fs::path write(const std::string& name, const std::string& text) {
  const fs::path p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

fs::path write_pair(const std::string& name, const DensityMatrix& a, const DensityMatrix& b) {
  const fs::path p = scratch(name);
  write_state_file(p, StateSet({a, b}, {"a", "b"}));
  return p;
}

}  // namespace

TEST_CASE("bfm on the epsilon = 0.3 pair") {
  const auto f = write_pair("eps.json", DensityMatrix::diagonal({1, 0}), DensityMatrix::diagonal({0.3, 0.7}));
  const Run r = run({"bfm", "-i", f.string(), "--format", "json"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(std::abs(doc["value"].get<double>() - 0.3) <= 1e-6);
  CHECK(doc["tol"].get<double>() == 1e-8);
  CHECK(doc.contains("upper_bound_1_minus_D"));
  CHECK(doc["dual_certificate"].size() == 2);
}

TEST_CASE("pp, es and pool produce reports") {
  const auto f = write_pair("mixed.json", DensityMatrix::maximally_mixed(2), DensityMatrix::diagonal({0.75, 0.25}));
  const Run es = run({"es", "-i", f.string(), "--format", "csv"});
  REQUIRE(es.code == 0);
  CHECK(es.out.rfind("criterion,states,dim,value", 0) == 0);
  CHECK(es.out.find("ES,2,2,0.333333") != std::string::npos);
  CHECK(run({"pp", "-i", f.string()}).code == 0);
  const Run pool = run({"pool", "-i", f.string()});
  REQUIRE(pool.code == 0);
  CHECK(pool.out.find("maximality_violations: 0") != std::string::npos);
}

TEST_CASE("check on orthogonal states") {
  const auto f = write_pair("orth.json", DensityMatrix::diagonal({1, 0}), DensityMatrix::diagonal({0, 1}));
  const Run r = run({"check", "-i", f.string()});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("incompatible, intersection dim 0\n", 0) == 0);
}

TEST_CASE("scenario fig2 on three grid points") {
  const Run r = run({"scenario", "fig2", "--theta-steps", "3"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  CHECK(header.rfind("theta,k_avg,", 0) == 0);
  std::vector<double> k;
  while (std::getline(lines, row)) {
    const auto a = row.find(',');
    const auto b = row.find(',', a + 1);
    k.push_back(std::stod(row.substr(a + 1, b - a - 1)));
  }
  REQUIRE(k.size() == 3);
  CHECK(std::abs(k[0] - 0.646446609407) <= 1e-6);
  CHECK(std::abs(k[1] - 1.0) <= 1e-6);
  CHECK(std::abs(k[2] - 0.646446609407) <= 1e-6);
}

TEST_CASE("scenario output is byte-stable") {
  const auto a = scratch("fig1_a.csv");
  const auto b = scratch("fig1_b.csv");
  const std::vector<std::string> common{"scenario", "fig1", "--theta-steps", "2", "--samples", "1000", "--seed", "7"};
  auto args_a = common;
  args_a.insert(args_a.end(), {"-o", a.string()});
  auto args_b = common;
  args_b.insert(args_b.end(), {"-o", b.string()});
  REQUIRE(run(args_a).code == 0);
  REQUIRE(run(args_b).code == 0);
  std::ifstream fa(a), fb(b);
  const std::string ta((std::istreambuf_iterator<char>(fa)), {});
  const std::string tb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(!ta.empty());
  CHECK(ta == tb);
}

TEST_CASE("maxent from a constraint file") {
  const auto f = write("z.json", R"({"observables": [{"matrix_re": [[1, 0], [0, -1]]}], "values": [0.6]})");
  const Run r = run({"maxent", "-i", f.string(), "--format", "json"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(std::abs(doc["state"]["matrix_re"][0][0].get<double>() - 0.8) <= 1e-10);

  const auto bad = write("xx.json", R"({"observables": [{"matrix_re": [[0, 1], [1, 0]]},
      {"matrix_re": [[0, 1], [1, 0]]}], "values": [0.5, -0.5]})");
  CHECK(run({"maxent", "-i", bad.string()}).code == 1);
  const auto edge = write("edge.json", R"({"observables": [{"matrix_re": [[1, 0], [0, -1]]}], "values": [1.0]})");
  CHECK(run({"maxent", "-i", edge.string()}).code == 2);
}

TEST_CASE("errors: exit codes, JSON diagnostics, no partial output") {
  const auto bad = write("trace.json", R"({"dim": 2, "states": [
      {"label": "short", "matrix_re": [[0.9, 0], [0, 0]]},
      {"label": "ok", "matrix_re": [[1, 0], [0, 0]]}]})");
  const auto out = scratch("never.txt");
  fs::remove(out);
  const Run r = run({"bfm", "-i", bad.string(), "-o", out.string(), "--format", "json"});
  CHECK(r.code == 1);
  CHECK_FALSE(fs::exists(out));
  const auto e = nlohmann::json::parse(r.err);
  CHECK(e["label"] == "short");
  CHECK(e["measured"].get<double>() == doctest::Approx(0.9));

  CHECK(run({"bfm", "-i", scratch("missing.json").string()}).code == 1);
  CHECK(run({"bfm"}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"scenario", "fig1", "--samples", "10", "-o", out.string()}).code == 1);
  CHECK_FALSE(fs::exists(out));
  const auto three = scratch("three.json");
  write_state_file(three, StateSet({DensityMatrix::maximally_mixed(2), DensityMatrix::maximally_mixed(2),
                                    DensityMatrix::maximally_mixed(2)}));
  CHECK(run({"pool", "-i", three.string()}).code == 1);
  const auto orth = write_pair("orth2.json", DensityMatrix::diagonal({1, 0}), DensityMatrix::diagonal({0, 1}));
  CHECK(run({"pool", "-i", orth.string()}).code == 1);
  CHECK(run({"--help"}).code == 0);
}
