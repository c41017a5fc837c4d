#include "besselp/instance_io.hpp"

#include "besselp/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace besselp {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& source, const std::string& pointer, const std::string& what) {
  throw ParseError(source + ": field " + pointer + ": " + what);
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

double positive(const json& v, const std::string& source, const std::string& pointer) {
  if (!v.is_number()) fail(source, pointer, "expected a number");
  const double d = v.get<double>();
  if (!(d > 0.0) || !std::isfinite(d)) fail(source, pointer, "must be positive and finite");
  return d;
}

const json& array_field(const json& doc, const char* key, const std::string& source) {
  const std::string ptr = std::string("/") + key;
  if (!doc.contains(key)) fail(source, ptr, "missing");
  const json& v = doc.at(key);
  if (!v.is_array()) fail(source, ptr, "expected an array");
  return v;
}

}  // namespace

InstanceFile parse_instance(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ":" + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)) +
                     ": syntax error: " + e.what());
  }
  if (!doc.is_object()) fail(source, "/", "expected an object");
  if (!doc.contains("lambda")) fail(source, "/lambda", "missing");
  const double lambda = positive(doc.at("lambda"), source, "/lambda");

  const json& js = array_field(doc, "sigma", source);
  std::vector<Atom1D> sigma;
  std::set<double> ys;
  for (std::size_t i = 0; i < js.size(); ++i) {
    const std::string ptr = "/sigma/" + std::to_string(i);
    if (!js[i].is_array() || js[i].size() != 2) fail(source, ptr, "expected [y, w]");
    const double y = positive(js[i][0], source, ptr + "/0");
    const double w = positive(js[i][1], source, ptr + "/1");
    if (!ys.insert(y).second) fail(source, ptr + "/0", "duplicate location");
    sigma.push_back({y, w});
  }
  if (sigma.empty()) fail(source, "/sigma", "must not be empty");

  const json& jm = array_field(doc, "mu", source);
  std::vector<Atom2D> mu;
  std::set<std::pair<double, double>> xts;
  for (std::size_t j = 0; j < jm.size(); ++j) {
    const std::string ptr = "/mu/" + std::to_string(j);
    if (!jm[j].is_array() || jm[j].size() != 3) fail(source, ptr, "expected [x, t, w]");
    const double x = positive(jm[j][0], source, ptr + "/0");
    const double t = positive(jm[j][1], source, ptr + "/1");
    const double w = positive(jm[j][2], source, ptr + "/2");
    if (!xts.insert({x, t}).second) fail(source, ptr, "duplicate location");
    mu.push_back({x, t, w});
  }
  if (mu.empty()) fail(source, "/mu", "must not be empty");

  InstanceFile out{TwoWeightInstance{BesselParam(lambda), DiscreteMeasure1D(std::move(sigma)),
                                     DiscreteMeasure2D(std::move(mu))},
                   std::nullopt};
  if (doc.contains("phi")) {
    const json& jp = array_field(doc, "phi", source);
    if (jp.size() != out.inst.mu.size()) fail(source, "/phi", "expected one value per mu-atom");
    std::vector<double> phi;
    for (std::size_t j = 0; j < jp.size(); ++j) {
      const std::string ptr = "/phi/" + std::to_string(j);
      if (!jp[j].is_number()) fail(source, ptr, "expected a number");
      const double v = jp[j].get<double>();
      if (!(v >= 0.0) || !std::isfinite(v)) fail(source, ptr, "must be nonnegative and finite");
      phi.push_back(v);
    }
    out.phi = std::move(phi);
  }
  return out;
}

InstanceFile load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str(), path);
}

std::string dump_instance(const TwoWeightInstance& inst, const std::vector<double>* phi) {
  json doc;
  doc["lambda"] = inst.p.lambda;
  doc["sigma"] = json::array();
  for (const auto& s : inst.sigma.atoms()) doc["sigma"].push_back({s.y, s.w});
  doc["mu"] = json::array();
  for (const auto& m : inst.mu.atoms()) doc["mu"].push_back({m.x, m.t, m.w});
  if (phi) doc["phi"] = *phi;
  return doc.dump(2);
}

}  // namespace besselp
