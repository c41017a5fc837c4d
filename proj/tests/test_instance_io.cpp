#include "besselp/error.hpp"
#include "besselp/instance_io.hpp"

#include <doctest.h>

#include <string>

using namespace besselp;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_instance(text, "in.json");
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

bool mentions(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("round trip through the measure file format") {
  const TwoWeightInstance inst{BesselParam(0.75), DiscreteMeasure1D({{0.3, 1.5}, {2.0 / 3.0, 0.1}}),
                               DiscreteMeasure2D({{1.0, 0.125, 2.0}, {0.1, 7.0, 0.3}})};
  const std::vector<double> phi{0.0, 1.0 / 7.0};
  const InstanceFile back = parse_instance(dump_instance(inst, &phi));
  CHECK(back.inst.p.lambda == 0.75);
  REQUIRE(back.inst.sigma.size() == 2);
  REQUIRE(back.inst.mu.size() == 2);
  CHECK(back.inst.sigma[1].y == 2.0 / 3.0);
  CHECK(back.inst.mu[1].t == 7.0);
  REQUIRE(back.phi);
  CHECK(*back.phi == phi);

  const InstanceFile nophi = parse_instance(dump_instance(inst));
  CHECK_FALSE(nophi.phi.has_value());
}

TEST_CASE("syntax errors report the line") {
  const std::string text = "{\n  \"lambda\": 1,\n  \"sigma\": [[1, 1],,]\n}";
  const std::string e = error_of(text);
  CHECK(mentions(e, "in.json:3"));
  CHECK(mentions(e, "syntax error"));
}

TEST_CASE("invalid fields report a JSON pointer") {
  CHECK(mentions(error_of(R"({"sigma": [[1,1]], "mu": [[1,1,1]]})"), "field /lambda"));
  CHECK(mentions(error_of(R"({"lambda": 0, "sigma": [[1,1]], "mu": [[1,1,1]]})"), "field /lambda"));
  CHECK(mentions(error_of(R"({"lambda": 1, "sigma": [[1,1],[2,-3]], "mu": [[1,1,1]]})"), "field /sigma/1/1"));
  CHECK(mentions(error_of(R"({"lambda": 1, "sigma": [[1,1]], "mu": [[1,0,1]]})"), "field /mu/0/1"));
  CHECK(mentions(error_of(R"({"lambda": 1, "sigma": [[1,1,1]], "mu": [[1,1,1]]})"), "field /sigma/0"));
  CHECK(mentions(error_of(R"({"lambda": 1, "sigma": [], "mu": [[1,1,1]]})"), "field /sigma"));
  CHECK(mentions(error_of(R"({"lambda": 1, "sigma": [[1,1]], "mu": "none"})"), "field /mu"));
  CHECK(mentions(error_of(R"({"lambda": "one", "sigma": [[1,1]], "mu": [[1,1,1]]})"), "field /lambda"));
  CHECK(mentions(error_of("[1, 2]"), "expected an object"));
}

TEST_CASE("duplicate atoms are rejected") {
  CHECK(mentions(error_of(R"({"lambda": 1, "sigma": [[1,1],[1,2]], "mu": [[1,1,1]]})"), "field /sigma/1/0"));
  CHECK(mentions(error_of(R"({"lambda": 1, "sigma": [[1,1]], "mu": [[1,1,1],[1,1,3]]})"), "field /mu/1"));
  // Same x at a different height is a different atom.
  CHECK(parse_instance(R"({"lambda": 1, "sigma": [[1,1]], "mu": [[1,1,1],[1,2,3]]})").inst.mu.size() == 2);
}

TEST_CASE("phi must match the mu atoms") {
  CHECK(mentions(error_of(R"({"lambda": 1, "sigma": [[1,1]], "mu": [[1,1,1]], "phi": [1, 2]})"), "field /phi"));
  CHECK(mentions(error_of(R"({"lambda": 1, "sigma": [[1,1]], "mu": [[1,1,1]], "phi": [-1]})"), "field /phi/0"));
  const auto ok = parse_instance(R"({"lambda": 1, "sigma": [[1,1]], "mu": [[1,1,1]], "phi": [0]})");
  REQUIRE(ok.phi);
  CHECK(ok.phi->at(0) == 0.0);
}

TEST_CASE("missing files") {
  CHECK_THROWS_AS(load_instance("/nonexistent/measure.json"), ParseError);
}
