#include <doctest.h>

#include <filesystem>

#include "generators.hpp"
#include "qcompat/state_io.hpp"

using namespace qcompat;
using namespace qcompat::testing;

TEST_CASE("parse a pure state and the maximally mixed state") {
  const StateSet s = parse_states(R"({"dim": 2, "states": [
      {"label": "alice", "matrix_re": [[1, 0], [0, 0]], "matrix_im": [[0, 0], [0, 0]]},
      {"label": "bob", "matrix_re": [[0.5, 0], [0, 0.5]]}]})");
  CHECK(s.size() == 2);
  CHECK(s.dim() == 2);
  CHECK(s.labels()[1] == "bob");
  CHECK((s[1].matrix() - DensityMatrix::maximally_mixed(2).matrix()).norm() == 0.0);
}

TEST_CASE("trace violations name the label and the measured trace") {
  try {
    parse_states(R"({"dim": 2, "states": [
        {"label": "short", "matrix_re": [[0.9, 0], [0, 0]]},
        {"label": "ok", "matrix_re": [[1, 0], [0, 0]]}]})");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.label() == "short");
    CHECK(e.measured() == doctest::Approx(0.9));
  }
}

TEST_CASE("mixed dimensions are a validation error") {
  CHECK_THROWS_AS(parse_states(R"({"dim": 2, "states": [
      {"label": "a", "matrix_re": [[1, 0, 0], [0, 0, 0], [0, 0, 0]]},
      {"label": "b", "matrix_re": [[1, 0], [0, 0]]}]})"),
                  ValidationError);
}

TEST_CASE("schema and syntax errors") {
  CHECK_THROWS_AS(parse_states("{not json"), ParseError);
  CHECK_THROWS_AS(parse_states(R"({"states": []})"), ParseError);
  CHECK_THROWS_AS(parse_states(R"({"dim": 2, "states": [{"label": "a"}]})"), ParseError);
  CHECK_THROWS_AS(parse_states(R"({"dim": 2, "states": [
      {"label": "a", "matrix_re": [[1, 0], [0, 0]]},
      {"label": "a", "matrix_re": [[0, 0], [0, 1]]}]})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_states(R"({"dim": 2, "states": [
      {"label": "a", "matrix_re": [[1, 0.4], [0, 0]]},
      {"label": "b", "matrix_re": [[0, 0], [0, 1]]}]})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_states(R"({"dim": 2, "states": [
      {"label": "neg", "matrix_re": [[1.5, 0], [0, -0.5]]},
      {"label": "b", "matrix_re": [[0, 0], [0, 1]]}]})"),
                  ValidationError);
}

TEST_CASE("write and re-parse reproduces matrices bitwise") {
  Rng rng(401);
  const auto path = std::filesystem::temp_directory_path() / "qcompat_roundtrip.json";
  for (int t = 0; t < 20; ++t) {
    const Index d = pick(rng, 2, 4);
    const StateSet s({random_mixed_rank(rng, d), random_mixed_rank(rng, d), random_state(rng, d)},
                     {"x", "y", "z"});
    write_state_file(path, s);
    const StateSet back = parse_state_file(path);
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(back[i].matrix() == s[i].matrix());
      CHECK(back.labels()[i] == s.labels()[i]);
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("constraint files") {
  const ConstraintSet cs = parse_constraints(R"({
      "observables": [{"matrix_re": [[1, 0], [0, -1]]},
                      {"matrix_re": [[0, 0], [0, 0]], "matrix_im": [[0, -1], [1, 0]]}],
      "values": [0.6, 0.1]})");
  CHECK(cs.dim == 2);
  REQUIRE(cs.constraints.size() == 2);
  CHECK((cs.constraints[1].observable.matrix() - pauli::Y()).norm() == 0.0);
  CHECK(cs.constraints[0].value == 0.6);

  const ConstraintSet empty = parse_constraints(R"({"dim": 3, "observables": [], "values": []})");
  CHECK(empty.dim == 3);
  CHECK_THROWS_AS(parse_constraints(R"({"observables": [], "values": []})"), ParseError);
  CHECK_THROWS_AS(parse_constraints(R"({"observables": [{"matrix_re": [[1]]}], "values": []})"),
                  ValidationError);
}
