#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fatou/cli.h"
#include "fatou/inner.h"

namespace fatou::cli {

namespace {

enum class Kind { Int, Double, Bool, Choice, Complex, DoubleList, IntList, ComplexList, ChoiceList, DiskList };

struct Field {
  std::string key;
  Kind kind;
  json fallback;  // null: optional without default
  std::vector<std::string> choices;
  bool required = false;
};

Field req(std::string key, Kind kind, std::vector<std::string> choices = {}) {
  return {std::move(key), kind, nullptr, std::move(choices), true};
}
Field opt(std::string key, Kind kind, json fallback = nullptr, std::vector<std::string> choices = {}) {
  return {std::move(key), kind, std::move(fallback), std::move(choices), false};
}

json cpx(double re, double im = 0.0) { return json::array({re, im}); }

const std::map<std::string, std::vector<Field>>& map_schema() {
  static const std::map<std::string, std::vector<Field>> s{
      {"polynomial", {req("coeffs", Kind::ComplexList)}},
      {"quadratic", {req("c", Kind::Complex)}},
      {"power", {req("degree", Kind::Int)}},
      {"blaschke", {req("zeros", Kind::ComplexList), opt("rotation", Kind::Complex, cpx(1.0))}},
      {"exp", {req("lambda", Kind::Complex)}},
      {"sine", {req("lambda", Kind::Complex)}},
      {"fatou_baker", {opt("cv_window", Kind::Double, 8.0 * kPi)}},
      {"half_plane_translation", {opt("shift", Kind::Double, 1.0)}},
  };
  return s;
}

const std::vector<Field>& param_schema(Experiment e) {
  static const std::map<Experiment, std::vector<Field>> s{
      {Experiment::Lyapunov,
       {opt("methods", Kind::ChoiceList, json::array({"quadrature"}), {"quadrature", "birkhoff_forward", "birkhoff_backward"}),
        opt("n_quad", Kind::Int, 4096), opt("steps", Kind::Int, 100000), opt("chains", Kind::Int, 1),
        opt("x0", Kind::Complex), opt("expected", Kind::Double), opt("tolerance", Kind::Double, 1e-3),
        opt("agreement_tolerance", Kind::Double, 5e-3), opt("green_tolerance", Kind::Double, 0.02)}},
      {Experiment::Hmeasure,
       {req("domain", Kind::Choice, {"unit_disk", "sector", "slit_plane", "poly_basin", "random_star"}),
        opt("alpha", Kind::Double, 0.25), opt("base", Kind::Complex),
        opt("backend", Kind::Choice, "auto", {"auto", "riemann", "wos", "bottcher"}),
        opt("mode", Kind::Choice, "series", {"series", "beurling"}),
        opt("radii", Kind::DoubleList, json::array({1e-1, 1e-2, 1e-3, 1e-4})), opt("target_center", Kind::Complex, cpx(0.0)),
        opt("walks", Kind::Int, 100000), opt("splitting", Kind::Bool, false), opt("domains", Kind::Int, 20),
        opt("targets_per_radius", Kind::Int, 4), opt("expected_slope", Kind::Double),
        opt("slope_tolerance", Kind::Double, 0.05), opt("closed_form_sigmas", Kind::Double)}},
      {Experiment::Backward,
       {opt("mode", Kind::Choice, "plane_equal_weight", {"plane_equal_weight", "circle_transfer"}),
        opt("steps", Kind::Int, 10000), opt("x0", Kind::Complex), opt("arc_start", Kind::Double, 1.0),
        opt("arc_length", Kind::Double, 0.05), opt("visit_factor", Kind::Double, 2.0)}},
      {Experiment::Tower,
       {opt("towers", Kind::Int, 32), opt("depth", Kind::Int, 40), opt("eta", Kind::Double, 0.0), opt("M", Kind::Double, 0.0),
        opt("rays", Kind::Int, 64), opt("chi", Kind::Double), opt("chi_chains", Kind::Int, 16),
        opt("slope_tolerance", Kind::Double, 0.15), opt("identity_tolerance", Kind::Double, 1e-8)}},
      {Experiment::Periodic,
       {opt("cover", Kind::Choice, "ring", {"ring", "explicit"}), opt("disks", Kind::DiskList, json::array()),
        opt("count", Kind::Int, 16), opt("radius", Kind::Double, 0.2), opt("cover_center", Kind::Complex),
        opt("max_orbits", Kind::Int, 400), opt("max_period", Kind::Int, 16), opt("cloud", Kind::Int, 4000),
        opt("min_found", Kind::Int)}},
      {Experiment::ReturnMap,
       {opt("set", Kind::Choice, "arc", {"arc", "disk"}), opt("arc_start", Kind::Double, 0.3),
        opt("arc_length", Kind::Double, kTwoPi / 8.0), opt("center", Kind::Complex, cpx(0.0)),
        opt("radius", Kind::Double, 0.3), opt("trials", Kind::Int, 100000), opt("cap", Kind::Int, 1000000),
        opt("kac_tolerance", Kind::Double, 0.05), opt("identity_tolerance", Kind::Double, 0.02)}},
      {Experiment::RhoCheck,
       {opt("check", Kind::Choice, "inclusion", {"inclusion", "thin"}), opt("configs", Kind::Int, 10000),
        opt("rings", Kind::Int, 16), opt("spokes", Kind::Int, 16), opt("punctures", Kind::ComplexList, json::array()),
        opt("epsilon", Kind::Double, 0.1), opt("mu", Kind::Double, 0.5), opt("d", Kind::Int, 2),
        opt("eta", Kind::Double, 0.1), opt("horizon", Kind::Int, 8), opt("cloud", Kind::Int, 4000)}},
      {Experiment::Inner,
       {opt("check", Kind::Choice, "denjoy_wolff", {"denjoy_wolff", "stolz", "invariance"}),
        opt("xi", Kind::Complex, cpx(1.0)), opt("rho", Kind::Double, 0.5),
        opt("alphas", Kind::DoubleList, json::array({kPi / 8.0, kPi / 4.0})),
        opt("branches", Kind::IntList, json::array({0, 1})),
        opt("measure", Kind::Choice, "lebesgue", {"lebesgue", "lambda_r"}), opt("K", Kind::Int, 5),
        opt("n_quad", Kind::Int, 65536), opt("gap", Kind::Double, 1e-3),
        opt("invariance_tolerance", Kind::Double, 1e-8)}},
  };
  return s.at(e);
}

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
  throw Error(Errc::SchemaError, path + ": " + msg);
}

double to_double(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) schema_error(path, "expected a number");
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    schema_error(path, "expected a number, got '" + n.Scalar() + "'");
  }
}

long to_int(const YAML::Node& n, const std::string& path) {
  const double v = to_double(n, path);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) schema_error(path, "expected an integer");
  return static_cast<long>(v);
}

json to_complex(const YAML::Node& n, const std::string& path) {
  if (n.IsScalar()) return cpx(to_double(n, path));
  if (n.IsSequence() && n.size() == 2) return cpx(to_double(n[0], path + "[0]"), to_double(n[1], path + "[1]"));
  schema_error(path, "expected a number or [re, im]");
}

std::string to_choice(const YAML::Node& n, const std::string& path, const std::vector<std::string>& choices) {
  if (!n.IsScalar()) schema_error(path, "expected a string");
  const std::string v = n.Scalar();
  for (const auto& c : choices)
    if (c == v) return v;
  std::string all;
  for (const auto& c : choices) all += (all.empty() ? "" : ", ") + c;
  schema_error(path, "'" + v + "' is not one of " + all);
}

json convert(const YAML::Node& n, const Field& f, const std::string& path) {
  auto seq = [&](auto&& each) {
    if (!n.IsSequence()) schema_error(path, "expected a list");
    json out = json::array();
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(each(n[i], path + "[" + std::to_string(i) + "]"));
    return out;
  };
  switch (f.kind) {
    case Kind::Int: return to_int(n, path);
    case Kind::Double: return to_double(n, path);
    case Kind::Bool:
      try {
        if (n.IsScalar()) return n.as<bool>();
      } catch (const YAML::Exception&) {
      }
      schema_error(path, "expected true or false");
    case Kind::Choice: return to_choice(n, path, f.choices);
    case Kind::Complex: return to_complex(n, path);
    case Kind::DoubleList: return seq([](const YAML::Node& x, const std::string& p) { return json(to_double(x, p)); });
    case Kind::IntList: return seq([](const YAML::Node& x, const std::string& p) { return json(to_int(x, p)); });
    case Kind::ComplexList: return seq(to_complex);
    case Kind::ChoiceList:
      return seq([&](const YAML::Node& x, const std::string& p) { return json(to_choice(x, p, f.choices)); });
    case Kind::DiskList:
      return seq([](const YAML::Node& x, const std::string& p) {
        if (!x.IsMap()) schema_error(p, "expected {center, radius}");
        for (const auto& kv : x) {
          const std::string k = kv.first.as<std::string>();
          if (k != "center" && k != "radius") schema_error(p + "." + k, "unknown key");
        }
        if (!x["center"] || !x["radius"]) schema_error(p, "disk needs center and radius");
        const double r = to_double(x["radius"], p + ".radius");
        if (!(r > 0.0)) schema_error(p + ".radius", "must be positive");
        return json{{"center", to_complex(x["center"], p + ".center")}, {"radius", r}};
      });
  }
  schema_error(path, "unsupported field");
}

json validate_table(const YAML::Node& node, const std::vector<Field>& fields, const std::string& path,
                    const std::vector<std::string>& extra_keys = {}) {
  json out = json::object();
  if (node && !node.IsNull() && !node.IsMap()) schema_error(path, "expected a table");
  if (node && node.IsMap()) {
    for (const auto& kv : node) {
      const std::string k = kv.first.as<std::string>();
      const bool known = std::any_of(fields.begin(), fields.end(), [&](const Field& f) { return f.key == k; }) ||
                         std::find(extra_keys.begin(), extra_keys.end(), k) != extra_keys.end();
      if (!known) schema_error(path + "." + k, "unknown key");
    }
  }
  for (const Field& f : fields) {
    const YAML::Node v = node && node.IsMap() ? node[f.key] : YAML::Node();
    if (!v || v.IsNull()) {
      if (f.required) schema_error(path + "." + f.key, "required key missing");
      out[f.key] = f.fallback;
    } else {
      out[f.key] = convert(v, f, path + "." + f.key);
    }
  }
  return out;
}

void check_ranges(Experiment e, const json& p) {
  auto positive = [&](const char* k) {
    if (p[k].is_number() && !(p[k].get<double>() > 0.0)) schema_error(std::string("params.") + k, "must be positive");
  };
  switch (e) {
    case Experiment::Lyapunov:
      for (const char* k : {"n_quad", "steps", "chains"}) positive(k);
      if (p["methods"].empty()) schema_error("params.methods", "need at least one method");
      break;
    case Experiment::Hmeasure:
      positive("walks");
      positive("domains");
      positive("targets_per_radius");
      if (!(p["alpha"].get<double>() > 0.0 && p["alpha"].get<double>() < 1.0)) schema_error("params.alpha", "must lie in (0, 1)");
      for (const auto& r : p["radii"])
        if (!(r.get<double>() > 0.0)) schema_error("params.radii", "radii must be positive");
      if (p["mode"] == "series" && p["radii"].empty()) schema_error("params.radii", "need at least one radius");
      break;
    case Experiment::Backward:
      positive("steps");
      positive("arc_length");
      break;
    case Experiment::Tower:
      for (const char* k : {"towers", "depth", "rays", "chi_chains"}) positive(k);
      break;
    case Experiment::Periodic:
      for (const char* k : {"count", "radius", "max_orbits", "max_period", "cloud"}) positive(k);
      if (p["cover"] == "explicit" && p["disks"].empty()) schema_error("params.disks", "explicit cover needs disks");
      break;
    case Experiment::ReturnMap:
      for (const char* k : {"arc_length", "radius", "trials", "cap"}) positive(k);
      break;
    case Experiment::RhoCheck:
      for (const char* k : {"configs", "rings", "spokes", "epsilon", "mu", "eta", "horizon", "cloud"}) positive(k);
      break;
    case Experiment::Inner:
      for (const char* k : {"rho", "K", "n_quad", "gap"}) positive(k);
      break;
  }
}

std::string hex_sha256(const std::string& text) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::Io, "SHA-256 digest failed");
  }
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    out += buf;
  }
  return out;
}

cplx complex_of(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

const std::vector<ExperimentInfo>& experiments() {
  static const std::vector<ExperimentInfo> all{
      {Experiment::Lyapunov, "lyapunov", "Lyapunov exponent by quadrature or Birkhoff averages"},
      {Experiment::Hmeasure, "hmeasure", "harmonic measure of shrinking disks, decay slope, Beurling bound"},
      {Experiment::Backward, "backward", "natural-extension backward orbit and its recurrence"},
      {Experiment::Tower, "tower", "inverse-branch towers with diameter certificates and contraction fit"},
      {Experiment::Periodic, "periodic", "repelling periodic points in a cover of the boundary"},
      {Experiment::ReturnMap, "return_map", "first-return times, Kac check and return Lyapunov identity"},
      {Experiment::RhoCheck, "rho_check", "rho-metric inclusions or thin singular value check"},
      {Experiment::Inner, "inner", "Denjoy-Wolff point, Stolz containment, boundary measure invariance"},
  };
  return all;
}

const char* experiment_name(Experiment e) {
  for (const auto& info : experiments())
    if (info.id == e) return info.name;
  return "?";
}

Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& ex) {
    throw Error(Errc::SchemaError, std::string("<root>: malformed text: ") + ex.what());
  }
  if (!root.IsMap()) schema_error("<root>", "expected a table");
  for (const auto& kv : root) {
    const std::string k = kv.first.as<std::string>();
    if (k != "experiment" && k != "map" && k != "params" && k != "seed" && k != "output_dir") {
      schema_error(k, "unknown key");
    }
  }
  Scenario s;
  if (!root["experiment"] || root["experiment"].IsNull()) schema_error("experiment", "required key missing");
  {
    const std::string name = root["experiment"].Scalar();
    bool found = false;
    for (const auto& info : experiments()) {
      if (name == info.name) {
        s.experiment = info.id;
        found = true;
      }
    }
    if (!found) schema_error("experiment", "unknown experiment '" + name + "'");
  }
  if (!root["seed"] || root["seed"].IsNull()) schema_error("seed", "required key missing");
  try {
    s.seed = root["seed"].as<std::uint64_t>();
  } catch (const YAML::Exception&) {
    schema_error("seed", "expected a non-negative 64-bit integer");
  }
  if (root["output_dir"] && !root["output_dir"].IsNull()) s.output_dir = root["output_dir"].as<std::string>();

  const YAML::Node m = root["map"];
  if (m && !m.IsNull()) {
    if (!m.IsMap() || !m["family"]) schema_error("map.family", "required key missing");
    const std::string fam = m["family"].Scalar();
    const auto it = map_schema().find(fam);
    if (it == map_schema().end()) schema_error("map.family", "unknown family '" + fam + "'");
    s.map = validate_table(m, it->second, "map", {"family"});
    s.map["family"] = fam;
    try {
      build_map(s.map);
    } catch (const Error& ex) {
      schema_error("map", ex.detail());
    }
  }
  s.params = validate_table(root["params"], param_schema(s.experiment), "params");
  check_ranges(s.experiment, s.params);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& s) {
  const json doc{{"experiment", experiment_name(s.experiment)}, {"map", s.map}, {"params", s.params}, {"seed", s.seed}};
  return doc.dump(2) + "\n";
}

std::string scenario_digest(const Scenario& s) { return hex_sha256(serialize_scenario(s)); }

Map build_map(const json& table) {
  if (table.is_null()) throw Error(Errc::SchemaError, "map: this experiment needs a map");
  const std::string fam = table.at("family").get<std::string>();
  if (fam == "polynomial") {
    std::vector<cplx> c;
    for (const auto& v : table.at("coeffs")) c.push_back(complex_of(v));
    return Map::polynomial(c);
  }
  if (fam == "quadratic") return Map::quadratic(complex_of(table.at("c")));
  if (fam == "power") return Map::power(table.at("degree").get<int>());
  if (fam == "blaschke") {
    std::vector<cplx> z;
    for (const auto& v : table.at("zeros")) z.push_back(complex_of(v));
    return Map::blaschke(z, complex_of(table.at("rotation")));
  }
  if (fam == "exp") return Map::exp_family(complex_of(table.at("lambda")));
  if (fam == "sine") return Map::sine_family(complex_of(table.at("lambda")));
  if (fam == "fatou_baker") return Map::fatou_baker(table.at("cv_window").get<double>());
  if (fam == "half_plane_translation") return half_plane_translation(table.at("shift").get<double>());
  throw Error(Errc::SchemaError, "map.family: unknown family '" + fam + "'");
}

bool RunReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

}  // namespace fatou::cli
