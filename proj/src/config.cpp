#include "nlphase/config.hpp"

#include <algorithm>

#include "nlphase/expression.hpp"

namespace nlphase {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ConfigError(where + ": " + what); }

const Json& need(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) fail(where, "missing key '" + key + "'");
  return j.at(key);
}

std::string get_string(const Json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

long long get_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<long long>();
}

int get_small_int(const Json& j, const std::string& where) {
  const long long v = get_int(j, where);
  if (v < -(1LL << 30) || v > (1LL << 30)) fail(where, "integer out of range");
  return static_cast<int>(v);
}

std::vector<int> get_int_list(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_small_int(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> get_double_list(const Json& j, const std::string& where) {
  const Vec v = parse_vec(j, where);
  return std::vector<double>(v.data(), v.data() + v.size());
}

Expression get_expression(const Json& j, const std::string& where) {
  const std::string text = get_string(j, where);
  try {
    return Expression::parse(text);
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what(), e.offset());
  }
}

std::string type_of(const Json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  return get_string(need(j, "type", where), where + ".type");
}

// The variant is named by "kind" (or the older "type"); the parsers below see it as "type".
// lebesgue_box and lebesgue_disc are accepted for lebesgue and disc.
Json canonical(const Json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  if (j.contains("kind") && j.contains("type")) fail(where, "give either kind or type");
  if (!j.contains("kind")) return j;
  Json c = j;
  c["type"] = c["kind"];
  c.erase("kind");
  if (c["type"] == "lebesgue_box") c["type"] = "lebesgue";
  if (c["type"] == "lebesgue_disc") c["type"] = "disc";
  return c;
}

}  // namespace

void require_keys(const Json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& item : j.items())
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      fail(where, "unknown key '" + item.key() + "'");
}

double parse_scalar(const Json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const Expression e = get_expression(j, where);
    if (e.arity() != 0) fail(where, "expression must not reference variables");
    return e(std::span<const double>{});
  }
  fail(where, "expected a number or a closed expression");
}

Vec parse_vec(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = parse_scalar(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

Mat parse_mat(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of rows");
  const Vec first = parse_vec(j[0], where + "[0]");
  Mat m(static_cast<Eigen::Index>(j.size()), first.size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vec row = parse_vec(j[r], where + "[" + std::to_string(r) + "]");
    if (row.size() != first.size()) fail(where, "rows differ in length");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

Box parse_box(const Json& j, const std::string& where) {
  require_keys(j, {"lo", "hi"}, where);
  Box b{parse_vec(need(j, "lo", where), where + ".lo"), parse_vec(need(j, "hi", where), where + ".hi")};
  if (b.lo.size() != b.hi.size()) fail(where, "lo and hi differ in dimension");
  if (!(b.hi.array() > b.lo.array()).all()) fail(where, "need lo < hi in every coordinate");
  return b;
}

Measure parse_measure(const Json& spec) {
  const std::string where = "measure";
  const Json j = canonical(spec, where);
  const std::string type = type_of(j, where);
  try {
    if (type == "lebesgue") {
      require_keys(j, {"type", "lo", "hi"}, where);
      const Box b = parse_box(Json{{"lo", j.at("lo")}, {"hi", j.at("hi")}}, where);
      return Measure::lebesgue_box(b.lo, b.hi);
    }
    if (type == "disc") {
      require_keys(j, {"type", "center", "radius"}, where);
      return Measure::lebesgue_disc(parse_vec(need(j, "center", where), where + ".center"),
                                    parse_scalar(need(j, "radius", where), where + ".radius"));
    }
    if (type == "self_similar") {
      require_keys(j, {"type", "ratio", "digits", "weights", "depth"}, where);
      const int ratio = get_small_int(need(j, "ratio", where), where + ".ratio");
      const auto digits = get_double_list(need(j, "digits", where), where + ".digits");
      const int depth = j.contains("depth") ? get_small_int(j.at("depth"), where + ".depth") : 30;
      if (j.contains("weights"))
        return Measure::self_similar(ratio, digits, get_double_list(j.at("weights"), where + ".weights"), depth);
      return Measure::uniform_self_similar(ratio, digits, depth);
    }
    if (type == "pushforward") {
      require_keys(j, {"type", "base", "phase"}, where);
      return pushforward(parse_measure(need(j, "base", where)), parse_phase(need(j, "phase", where)));
    }
  } catch (const DomainError& e) {
    fail(where, e.what());
  }
  fail(where, "unknown measure type '" + type + "'");
}

PhaseMap parse_phase(const Json& spec) {
  const std::string where = "phase";
  const Json j = canonical(spec, where);
  const std::string type = type_of(j, where);
  try {
    if (type == "identity") {
      require_keys(j, {"type", "dim"}, where);
      return PhaseMap::identity(j.contains("dim") ? get_small_int(j.at("dim"), where + ".dim") : 1);
    }
    if (type == "affine") {
      require_keys(j, {"type", "M", "b"}, where);
      const Mat M = parse_mat(need(j, "M", where), where + ".M");
      const Vec b = j.contains("b") ? parse_vec(j.at("b"), where + ".b") : Vec(Vec::Zero(M.rows()));
      return PhaseMap::affine(M, b);
    }
    if (type == "digit_map") {
      require_keys(j, {"type", "in_base", "in_digits", "out_base", "out_digits", "depth"}, where);
      DigitMapParams p;
      p.in_base = get_small_int(need(j, "in_base", where), where + ".in_base");
      p.in_digits = get_int_list(need(j, "in_digits", where), where + ".in_digits");
      p.out_base = get_small_int(need(j, "out_base", where), where + ".out_base");
      p.out_digits = get_int_list(need(j, "out_digits", where), where + ".out_digits");
      if (j.contains("depth")) p.depth = get_small_int(j.at("depth"), where + ".depth");
      return PhaseMap::digit_map(std::move(p));
    }
    if (type == "expression") {
      require_keys(j, {"type", "in_dim", "components"}, where);
      const int in_dim = get_small_int(need(j, "in_dim", where), where + ".in_dim");
      const Json& comps = need(j, "components", where);
      if (!comps.is_array() || comps.empty()) fail(where + ".components", "expected a non-empty array of expressions");
      std::vector<Expression> exprs;
      std::vector<std::string> labels;
      for (std::size_t i = 0; i < comps.size(); ++i) {
        exprs.push_back(get_expression(comps[i], where + ".components[" + std::to_string(i) + "]"));
        if (exprs.back().arity() > in_dim) fail(where + ".components", "expression uses variables beyond in_dim");
        labels.push_back(exprs.back().text());
      }
      const VectorFn fn = [exprs](std::span<const double> x, std::span<double> y) {
        for (std::size_t i = 0; i < exprs.size(); ++i) y[i] = exprs[i](x);
      };
      return PhaseMap::custom(in_dim, static_cast<int>(exprs.size()), fn, {}, labels);
    }
    if (type == "holhos") {
      require_keys(j, {"type"}, where);
      return PhaseMap::holhos();
    }
    if (type == "unipotent") {
      require_keys(j, {"type", "dim", "l"}, where);
      const int dim = get_small_int(need(j, "dim", where), where + ".dim");
      const Json& l = need(j, "l", where);
      if (!l.is_array()) fail(where + ".l", "expected an array of expressions");
      std::vector<Expression> exprs;
      for (std::size_t i = 0; i < l.size(); ++i) exprs.push_back(get_expression(l[i], where + ".l[" + std::to_string(i) + "]"));
      return PhaseMap::unipotent(dim, exprs);
    }
    if (type == "triangular2d") {
      require_keys(j, {"type", "z", "f", "K"}, where);
      const Expression z = get_expression(need(j, "z", where), where + ".z");
      const Expression f = j.contains("f") ? get_expression(j.at("f"), where + ".f") : Expression::parse("0");
      const double K = j.contains("K") ? parse_scalar(j.at("K"), where + ".K") : 0.0;
      return PhaseMap::triangular2d(z, f, K);
    }
    if (type == "group") {
      require_keys(j, {"type", "preset", "A", "ell"}, where);
      Json g = j;
      g.erase("type");
      return phase_from_group(parse_group(g));
    }
    if (type == "compose") {
      require_keys(j, {"type", "outer", "inner"}, where);
      return PhaseMap::compose(parse_phase(need(j, "outer", where)), parse_phase(need(j, "inner", where)));
    }
  } catch (const DomainError& e) {
    fail(where, e.what());
  }
  fail(where, "unknown phase type '" + type + "'");
}

GroupData parse_group(const Json& j) {
  const std::string where = "group";
  require_keys(j, {"preset", "A", "ell"}, where);
  try {
    if (j.contains("preset")) {
      if (j.contains("A") || j.contains("ell")) fail(where, "give either a preset or A and ell");
      return group_preset(get_string(j.at("preset"), where + ".preset"));
    }
    GroupData g;
    const Json& A = need(j, "A", where);
    if (!A.is_array() || A.empty()) fail(where + ".A", "expected a non-empty array of matrices");
    for (std::size_t i = 0; i < A.size(); ++i) g.A.push_back(parse_mat(A[i], where + ".A[" + std::to_string(i) + "]"));
    g.ell = parse_vec(need(j, "ell", where), where + ".ell");
    validate(g);
    return g;
  } catch (const DomainError& e) {
    fail(where, e.what());
  }
}

SpectrumSet parse_spectrum(const Json& spec) {
  const std::string where = "spectrum";
  const Json j = canonical(spec, where);
  const std::string type = type_of(j, where);
  SpectrumSet s;
  try {
    if (type == "lattice") {
      require_keys(j, {"type", "A", "dim", "scale", "dual", "radius", "embed"}, where);
      Mat A;
      if (j.contains("A")) {
        if (j.contains("dim")) fail(where, "give either A or dim");
        A = parse_mat(j.at("A"), where + ".A");
      } else {
        A = Mat::Identity(get_small_int(need(j, "dim", where), where + ".dim"),
                          get_small_int(need(j, "dim", where), where + ".dim"));
      }
      if (j.contains("scale")) A *= parse_scalar(j.at("scale"), where + ".scale");
      if (j.contains("dual")) {
        if (!j.at("dual").is_boolean()) fail(where + ".dual", "expected a boolean");
        if (j.at("dual").get<bool>()) A = dual_lattice(A);
      }
      s = lattice(A, parse_scalar(need(j, "radius", where), where + ".radius"));
    } else if (type == "lambda4") {
      require_keys(j, {"type", "n", "embed"}, where);
      s = lambda4(get_small_int(need(j, "n", where), where + ".n"));
    } else if (type == "explicit") {
      require_keys(j, {"type", "points", "embed"}, where);
      const Mat P = parse_mat(need(j, "points", where), where + ".points");
      PointSet ps(static_cast<int>(P.cols()), 0);
      for (Eigen::Index r = 0; r < P.rows(); ++r) {
        const Vec row = P.row(r).transpose();
        ps.push_back(as_span(row));
      }
      s = explicit_spectrum(std::move(ps));
    } else {
      fail(where, "unknown spectrum type '" + type + "'");
    }
    if (j.contains("embed")) {
      const Json& e = j.at("embed");
      require_keys(e, {"dim", "axes"}, where + ".embed");
      s = embed(s, get_small_int(need(e, "dim", where + ".embed"), where + ".embed.dim"),
                get_int_list(need(e, "axes", where + ".embed"), where + ".embed.axes"));
    }
  } catch (const DomainError& e) {
    fail(where, e.what());
  }
  return s;
}

QuadratureSpec parse_quad(const Json& j) {
  const std::string where = "quad";
  if (!j.is_object()) fail(where, "expected an object");
  const std::string scheme = get_string(need(j, "scheme", where), where + ".scheme");
  QuadratureSpec spec;
  if (scheme == "tensor_gauss") {
    require_keys(j, {"scheme", "order", "panels", "tol", "max_panels"}, where);
    TensorGauss t;
    if (j.contains("order")) t.order = get_small_int(j.at("order"), where + ".order");
    if (j.contains("panels")) t.panels = get_small_int(j.at("panels"), where + ".panels");
    if (j.contains("tol")) t.tol = parse_scalar(j.at("tol"), where + ".tol");
    if (j.contains("max_panels")) t.max_panels = get_small_int(j.at("max_panels"), where + ".max_panels");
    spec = t;
  } else if (scheme == "monte_carlo") {
    require_keys(j, {"scheme", "samples", "seed"}, where);
    MonteCarlo m;
    if (j.contains("samples")) m.samples = static_cast<std::size_t>(get_int(j.at("samples"), where + ".samples"));
    if (j.contains("seed")) m.seed = static_cast<std::uint64_t>(get_int(j.at("seed"), where + ".seed"));
    spec = m;
  } else if (scheme == "digit") {
    require_keys(j, {"scheme", "depth", "max_nodes"}, where);
    DigitScheme d;
    if (j.contains("depth")) d.depth = get_small_int(j.at("depth"), where + ".depth");
    if (j.contains("max_nodes")) d.max_nodes = static_cast<std::size_t>(get_int(j.at("max_nodes"), where + ".max_nodes"));
    spec = d;
  } else if (scheme == "adaptive") {
    require_keys(j, {"scheme", "abs_tol", "max_subdivisions"}, where);
    AdaptiveScheme a;
    if (j.contains("abs_tol")) a.abs_tol = parse_scalar(j.at("abs_tol"), where + ".abs_tol");
    if (j.contains("max_subdivisions"))
      a.max_subdivisions = get_small_int(j.at("max_subdivisions"), where + ".max_subdivisions");
    spec = a;
  } else {
    fail(where, "unknown scheme '" + scheme + "'");
  }
  try {
    validate(spec);
  } catch (const DomainError& e) {
    fail(where, e.what());
  }
  return spec;
}

RunConfig parse_config(const Json& j) {
  require_keys(j, {"command", "description", "measure", "phase", "spectrum", "quad", "seed", "out", "options", "group"},
               "config");
  RunConfig c;
  c.raw = j;
  if (j.contains("command")) c.command = get_string(j.at("command"), "command");
  if (j.contains("description")) c.description = get_string(j.at("description"), "description");
  if (j.contains("measure")) c.measure = parse_measure(j.at("measure"));
  if (j.contains("phase")) c.phase = parse_phase(j.at("phase"));
  if (j.contains("spectrum")) c.spectrum = parse_spectrum(j.at("spectrum"));
  if (j.contains("quad")) c.quad = parse_quad(j.at("quad"));
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) fail("seed", "expected an integer");
    if (j.at("seed").is_number_integer() && j.at("seed").get<long long>() < 0) fail("seed", "must be non-negative");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("out")) c.out = get_string(j.at("out"), "out");
  if (j.contains("options")) {
    if (!j.at("options").is_object()) fail("options", "expected an object");
    c.options = j.at("options");
  }
  if (j.contains("group")) c.group = parse_group(j.at("group"));
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace nlphase
