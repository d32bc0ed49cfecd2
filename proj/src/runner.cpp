#include "nlphase/runner.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nlphase/frame.hpp"
#include "nlphase/gram.hpp"
#include "nlphase/kernels.hpp"
#include "nlphase/phase_checks.hpp"
#include "nlphase/reconstruct.hpp"
#include "nlphase/tiling.hpp"

namespace nlphase {

namespace {

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json to_json(const Complex& z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

Json quad_json(const QuadratureSpec& q) {
  return std::visit(
      [](const auto& s) -> Json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TensorGauss>)
          return {{"scheme", "tensor_gauss"}, {"order", s.order}, {"panels", s.panels}, {"tol", s.tol},
                  {"max_panels", s.max_panels}};
        else if constexpr (std::is_same_v<T, MonteCarlo>)
          return {{"scheme", "monte_carlo"}, {"samples", s.samples}, {"seed", s.seed}};
        else if constexpr (std::is_same_v<T, DigitScheme>)
          return {{"scheme", "digit"}, {"depth", s.depth}, {"max_nodes", s.max_nodes}};
        else
          return {{"scheme", "adaptive"}, {"abs_tol", s.abs_tol}, {"max_subdivisions", s.max_subdivisions}};
      },
      q);
}

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::Pass: return kExitPass;
    case Verdict::Fail: return kExitFail;
    default: return kExitInconclusive;
  }
}

// Typed access to one command's option block with strict key checking.
class Options {
public:
  Options(const RunConfig& config, const std::string& command, const std::vector<std::string>& allowed)
      : where_("options." + command) {
    require_keys(config.options, command_names(), "options");
    if (config.options.contains(command)) j_ = config.options.at(command);
    else j_ = Json::object();
    require_keys(j_, allowed, where_);
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  const Json& at(const std::string& k) const { return j_.at(k); }
  std::string where(const std::string& k) const { return where_ + "." + k; }

  double number(const std::string& k, double def) const { return has(k) ? parse_scalar(j_.at(k), where(k)) : def; }
  std::size_t count(const std::string& k, std::size_t def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_number_integer() || j_.at(k).get<long long>() < 0)
      throw ConfigError(where(k) + ": expected a non-negative integer");
    return j_.at(k).get<std::size_t>();
  }
  int integer(const std::string& k, int def) const { return static_cast<int>(count(k, static_cast<std::size_t>(def))); }
  bool flag(const std::string& k, bool def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_boolean()) throw ConfigError(where(k) + ": expected a boolean");
    return j_.at(k).get<bool>();
  }
  std::string text(const std::string& k, const std::string& def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_string()) throw ConfigError(where(k) + ": expected a string");
    return j_.at(k).get<std::string>();
  }

private:
  std::string where_;
  Json j_;
};

template <class T>
const T& need(const std::optional<T>& v, const char* what, const std::string& command) {
  if (!v) throw ConfigError(command + " needs a '" + std::string(what) + "' section");
  return *v;
}

std::string csv_complex_matrix(const CMat& m) {
  std::ostringstream os;
  os << std::setprecision(17) << "row,col,re,im\n";
  for (Eigen::Index a = 0; a < m.rows(); ++a)
    for (Eigen::Index b = 0; b < m.cols(); ++b) os << a << "," << b << "," << m(a, b).real() << "," << m(a, b).imag() << "\n";
  return os.str();
}

Json gram_json(const GramReport& g) {
  return {{"n", g.n},
          {"max_offdiag", g.max_offdiag},
          {"diag_dev", g.diag_dev},
          {"hermiticity", g.hermiticity},
          {"quad_error", g.quad_error},
          {"total_mass", g.total_mass},
          {"distinct_differences", g.distinct_differences},
          {"cache_hits", g.cache_hits},
          {"nodes", g.nodes},
          {"method", g.method},
          {"quad", quad_json(g.quad)}};
}

RunOutcome run_verify_onb(const RunConfig& c) {
  const Options o(c, "verify-onb", {"tol_orth", "tol_c", "battery", "product_formula", "trunc", "max_points", "gram_csv"});
  const Measure& mu = need(c.measure, "measure", "verify-onb");
  const PhaseMap& phi = need(c.phase, "phase", "verify-onb");
  const SpectrumSet& s = need(c.spectrum, "spectrum", "verify-onb");
  VerifyOptions vo;
  vo.tol_orth = o.number("tol_orth", vo.tol_orth);
  vo.tol_c = o.number("tol_c", vo.tol_c);
  vo.gram.product_formula = o.flag("product_formula", vo.gram.product_formula);
  vo.gram.trunc = o.integer("trunc", vo.gram.trunc);
  vo.gram.max_points = o.count("max_points", vo.gram.max_points);
  const std::string battery = o.text("battery", "default");
  std::vector<TestFunction> tests;
  if (battery == "default" || battery == "both") tests = default_battery(mu);
  if (battery == "extended" || battery == "both") {
    auto more = extended_battery(mu);
    tests.insert(tests.end(), more.begin(), more.end());
  }
  if (tests.empty()) throw ConfigError(o.where("battery") + ": expected default, extended or both");

  const OnbReport r = verify_onb(mu, phi, s, c.quad, tests, vo);
  RunOutcome out;
  Json rows = Json::array();
  std::ostringstream pcsv;
  pcsv << std::setprecision(17) << "test,ratio,norm2\n";
  for (const ParsevalRow& p : r.parseval) {
    rows.push_back({{"test", p.name}, {"ratio", p.ratio}, {"norm2", p.norm2}});
    pcsv << p.name << "," << p.ratio << "," << p.norm2 << "\n";
  }
  out.report = {{"gram", gram_json(r.gram)},
                {"orthogonal", r.orthogonal},
                {"tol_orth", vo.tol_orth},
                {"tol_c", vo.tol_c},
                {"parseval", rows},
                {"coefficient_error", r.coefficient_error},
                {"bessel_violation", r.bessel_violation},
                {"reason", r.reason},
                {"verdict", to_string(r.verdict)}};
  out.csv.emplace_back("parseval", pcsv.str());
  if (o.flag("gram_csv", r.gram.n <= 256)) out.csv.emplace_back("gram", csv_complex_matrix(r.gram.entries));
  out.exit_code = exit_for(r.verdict);
  return out;
}

RunOutcome run_frame_bounds(const RunConfig& c) {
  const Options o(c, "frame-bounds", {"basis", "M", "orthonormality_tol"});
  FrameOptions fo;
  const std::string basis = o.text("basis", "dyadic");
  if (basis == "dyadic") fo.basis = TestBasis::Dyadic;
  else if (basis == "legendre") fo.basis = TestBasis::Legendre;
  else throw ConfigError(o.where("basis") + ": expected dyadic or legendre");
  fo.M = o.integer("M", fo.M);
  fo.orthonormality_tol = o.number("orthonormality_tol", fo.orthonormality_tol);
  const FrameBoundsReport r = frame_bounds(need(c.measure, "measure", "frame-bounds"), need(c.phase, "phase", "frame-bounds"),
                                           need(c.spectrum, "spectrum", "frame-bounds"), c.quad, fo);
  RunOutcome out;
  std::ostringstream csv;
  csv << std::setprecision(17) << "index,singular_value\n";
  for (std::size_t i = 0; i < r.singular_values.size(); ++i) csv << i << "," << r.singular_values[i] << "\n";
  const Verdict v = r.A > 1e-8 ? Verdict::Pass : Verdict::Inconclusive;
  out.report = {{"A", r.A},
                {"B", r.B},
                {"K", r.K},
                {"M", r.M},
                {"test_family", r.test_family},
                {"orthonormality_dev", r.orthonormality_dev},
                {"quad_error", r.quad_error},
                {"bias", r.bias},
                {"quad", quad_json(r.quad)},
                {"verdict", to_string(v)}};
  out.csv.emplace_back("singular_values", csv.str());
  out.exit_code = exit_for(v);
  return out;
}

RunOutcome run_tiling(const RunConfig& c) {
  const Options o(c, "tiling-check",
                  {"lattice", "radius", "overlap_samples", "histogram_samples", "bins", "volume_tol"});
  const Measure& mu = need(c.measure, "measure", "tiling-check");
  const PhaseMap& phi = need(c.phase, "phase", "tiling-check");
  if (!mu.as_box()) throw ConfigError("tiling-check: measure must be a Lebesgue box");
  const Box box{mu.as_box()->lo, mu.as_box()->hi};
  const Mat A = o.has("lattice") ? parse_mat(o.at("lattice"), o.where("lattice")) : Mat(Mat::Identity(phi.out_dim(), phi.out_dim()));
  TilingConfig tc;
  tc.radius = o.integer("radius", tc.radius);
  tc.overlap_samples = o.count("overlap_samples", tc.overlap_samples);
  tc.histogram_samples = o.count("histogram_samples", tc.histogram_samples);
  tc.bins_per_axis = o.integer("bins", tc.bins_per_axis);
  tc.volume_tol = o.number("volume_tol", tc.volume_tol);
  tc.seed = c.seed;
  const TilingReport r = tiling_verdict(phi, box, A, tc);

  RunOutcome out;
  Json overlaps = Json::array();
  std::ostringstream ocsv;
  ocsv << std::setprecision(17);
  for (int k = 0; k < phi.out_dim(); ++k) ocsv << "k" << k + 1 << ",";
  ocsv << "volume,std_err,failures,valid\n";
  for (const OverlapReport& ov : r.overlaps) {
    if (ov.volume > 0.0 || !ov.valid)
      overlaps.push_back({{"k", to_json(ov.k)}, {"volume", ov.volume}, {"std_err", ov.std_err}, {"failures", ov.failures},
                          {"valid", ov.valid}});
    for (Eigen::Index k = 0; k < ov.k.size(); ++k) ocsv << ov.k[k] << ",";
    ocsv << ov.volume << "," << ov.std_err << "," << ov.failures << "," << (ov.valid ? 1 : 0) << "\n";
  }
  std::ostringstream hcsv;
  write_histogram_csv(r.histogram, phi.out_dim(), hcsv);
  out.report = {{"packing", to_string(r.packing)},
                {"volume_match", r.volume_match},
                {"image_volume", r.image_volume},
                {"image_volume_err", r.image_volume_err},
                {"det_A", r.det_A},
                {"translates_checked", r.overlaps.size()},
                {"positive_overlaps", overlaps},
                {"overlap_method", r.overlaps.empty() ? "" : r.overlaps.front().method},
                {"histogram",
                 {{"chi2", r.histogram.chi2},
                  {"dof", r.histogram.dof},
                  {"q99", r.histogram.q99},
                  {"q9999", r.histogram.q9999},
                  {"verdict", r.histogram.verdict},
                  {"empty_bins", r.histogram.empty_bins},
                  {"samples", r.histogram.n},
                  {"covolume_matches", r.histogram.covolume_matches}}},
                {"verdict", r.tiling}};
  out.csv.emplace_back("overlaps", ocsv.str());
  out.csv.emplace_back("histogram", hcsv.str());
  out.exit_code = r.tiling == "TILES" ? kExitPass : (r.tiling == "NOT-TILING" ? kExitFail : kExitInconclusive);
  return out;
}

RunOutcome run_density(const RunConfig& c) {
  const Options o(c, "density", {"radii", "centers", "center_range", "lambda4_levels"});
  const SpectrumSet& s = need(c.spectrum, "spectrum", "density");
  std::vector<double> radii{10.0, 20.0, 40.0};
  if (o.has("radii")) {
    const Vec r = parse_vec(o.at("radii"), o.where("radii"));
    radii.assign(r.data(), r.data() + r.size());
  }
  const DensityReport d = beurling_density(s, radii, o.count("centers", 64), o.number("center_range", 100.0), c.seed);
  RunOutcome out;
  Json rows = Json::array();
  std::ostringstream csv;
  csv << std::setprecision(17) << "R,d_plus,d_minus\n";
  for (const DensityRow& r : d.rows) {
    rows.push_back({{"R", r.R}, {"d_plus", r.d_plus}, {"d_minus", r.d_minus}});
    csv << r.R << "," << r.d_plus << "," << r.d_minus << "\n";
  }
  out.report = {{"rows", rows}, {"centers", d.centers}, {"trend", d.verdict}};
  out.exit_code = kExitPass;
  if (o.has("lambda4_levels")) {
    Json counts = Json::array();
    bool all_match = true;
    for (int n = 1; n <= o.integer("lambda4_levels", 0); ++n) {
      const double hi = std::ldexp(1.0, 2 * n);
      const std::size_t cnt = count_in_window(s, Vec::Zero(1), Vec::Constant(1, hi));
      const bool match = cnt == (std::size_t{1} << n);
      all_match = all_match && match;
      counts.push_back({{"n", n}, {"window_hi", hi}, {"count", cnt}, {"expected", std::size_t{1} << n}});
    }
    out.report["lambda4_counts"] = counts;
    out.report["verdict"] = all_match ? "PASS" : "FAIL";
    out.exit_code = all_match ? kExitPass : kExitFail;
  }
  out.csv.emplace_back("density", csv.str());
  return out;
}

RunOutcome run_reconstruct(const RunConfig& c) {
  const Options o(c, "reconstruct", {"function", "l2"});
  const Measure& mu = need(c.measure, "measure", "reconstruct");
  const PhaseMap& phi = need(c.phase, "phase", "reconstruct");
  const SpectrumSet& s = need(c.spectrum, "spectrum", "reconstruct");
  if (!o.has("function")) throw ConfigError("reconstruct needs options.reconstruct.function");
  const Expression fe = [&] {
    try {
      return Expression::parse(o.text("function", ""));
    } catch (const ParseError& e) {
      throw ParseError(o.where("function") + ": " + e.what(), e.offset());
    }
  }();
  if (fe.arity() > mu.dim()) throw ConfigError(o.where("function") + ": references variables beyond the measure dimension");
  const Integrand f = [fe](std::span<const double> x) { return Complex(fe(x), 0.0); };
  const CoefficientReport cr = coefficients(f, mu, phi, s, c.quad);
  RunOutcome out;
  std::ostringstream csv;
  csv << std::setprecision(17);
  for (int k = 0; k < s.dim(); ++k) csv << "lambda" << k + 1 << ",";
  csv << "re,im,error,flagged\n";
  std::size_t flagged = 0;
  double energy = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (int k = 0; k < s.dim(); ++k) csv << s.points[i][k] << ",";
    csv << cr.values[i].real() << "," << cr.values[i].imag() << "," << cr.errors[i] << "," << (cr.flagged[i] ? 1 : 0) << "\n";
    flagged += cr.flagged[i] ? 1 : 0;
    energy += std::norm(cr.values[i]);
  }
  out.report = {{"coefficients", s.size()}, {"flagged", flagged}, {"coefficient_energy", energy},
                {"truncation", cr.truncation}, {"quad", quad_json(cr.quad)}};
  if (o.flag("l2", true)) {
    const L2Error e = l2_error(f, synthesize(cr.values, phi, s), mu, c.quad);
    out.report["l2_error"] = e.value;
    out.report["l2_error_estimate"] = e.error;
  }
  out.csv.emplace_back("coefficients", csv.str());
  out.exit_code = kExitPass;
  return out;
}

RunOutcome run_repdisc(const RunConfig& c) {
  const Options o(c, "repdisc", {"omega", "gammas", "window", "mode", "tol", "basis", "M", "ks_samples", "note"});
  const GroupData& g = need(c.group, "group", "repdisc");
  const SpectrumSet& s = need(c.spectrum, "spectrum", "repdisc");
  WindowSystem ws;
  ws.phi = phase_from_group(g);
  if (!o.has("omega")) throw ConfigError("repdisc needs options.repdisc.omega");
  ws.omega = parse_box(o.at("omega"), o.where("omega"));
  ws.spectrum = s;
  const int m = ws.omega.dim();
  if (!o.has("gammas")) throw ConfigError("repdisc needs options.repdisc.gammas");
  const Json& gj = o.at("gammas");
  require_keys(gj, {"step", "radius", "points"}, o.where("gammas"));
  if (gj.contains("points")) {
    const Mat P = parse_mat(gj.at("points"), o.where("gammas.points"));
    for (Eigen::Index r = 0; r < P.rows(); ++r) ws.gammas.emplace_back(P.row(r).transpose());
  } else {
    const Vec step = gj.contains("step") ? parse_vec(gj.at("step"), o.where("gammas.step")) : Vec(ws.omega.hi - ws.omega.lo);
    if (step.size() != m) throw ConfigError(o.where("gammas.step") + ": wrong dimension");
    if (!gj.contains("radius")) throw ConfigError(o.where("gammas") + ": needs radius or points");
    const SpectrumSet idx = lattice(Mat::Identity(m, m), parse_scalar(gj.at("radius"), o.where("gammas.radius")));
    for (std::size_t i = 0; i < idx.size(); ++i) ws.gammas.emplace_back(step.cwiseProduct(idx.points.point(i)));
  }
  const Box window = o.has("window") ? parse_box(o.at("window"), o.where("window")) : ws.omega;
  RepdiscOptions ro;
  const std::string mode = o.text("mode", "onb");
  if (mode == "onb") ro.mode = RepMode::Onb;
  else if (mode == "frame") ro.mode = RepMode::Frame;
  else throw ConfigError(o.where("mode") + ": expected onb or frame");
  ro.tol = o.number("tol", ro.tol);
  const std::string basis = o.text("basis", "dyadic");
  ro.frame.basis = basis == "legendre" ? TestBasis::Legendre : TestBasis::Dyadic;
  ro.frame.M = o.integer("M", ro.frame.M);
  ro.seed = c.seed;
  const RepdiscReport r = verify_system_on_window(ws, window, c.quad, ro);

  RunOutcome out;
  Json blocks = Json::array();
  std::ostringstream csv;
  csv << std::setprecision(17);
  for (int k = 0; k < m; ++k) csv << "gamma" << k + 1 << ",";
  csv << "max_offdiag,diag_dev,A,B,quad_error\n";
  for (const BlockReport& b : r.blocks) {
    blocks.push_back({{"gamma", to_json(b.gamma)}, {"max_offdiag", b.max_offdiag}, {"diag_dev", b.diag_dev}, {"A", b.A},
                      {"B", b.B}, {"quad_error", b.quad_error}});
    for (Eigen::Index k = 0; k < b.gamma.size(); ++k) csv << b.gamma[k] << ",";
    csv << b.max_offdiag << "," << b.diag_dev << "," << b.A << "," << b.B << "," << b.quad_error << "\n";
  }
  out.report = {{"mode", mode},
                {"blocks", blocks},
                {"cross_block_max", r.cross_block_max},
                {"scope", r.scope},
                {"spectrum", s.describe()},
                {"verdict", to_string(r.verdict)}};
  if (ro.mode == RepMode::Onb) {
    out.report["max_offdiag"] = r.max_offdiag;
    out.report["max_diag_dev"] = r.max_diag_dev;
    out.report["tol"] = ro.tol;
  } else {
    out.report["min_A"] = r.min_A;
    out.report["max_B"] = r.max_B;
  }
  if (o.has("note")) out.report["note"] = o.text("note", "");
  if (o.has("ks_samples")) {
    // phi(s) = ell exp(-a s) pushes Lebesgue on [lo, hi) to dy / (a y) on its image.
    if (g.m() != 1 || g.d() != 1 || m != 1 || g.A[0](0, 0) == 0.0 || g.ell[0] <= 0.0)
      throw ConfigError(o.where("ks_samples") + ": only for one-parameter scalar exponential groups with ell > 0");
    const double a = g.A[0](0, 0);
    const double lo = ws.omega.lo[0];
    const double hi = ws.omega.hi[0];
    const double ymin = std::min(g.ell[0] * std::exp(-a * lo), g.ell[0] * std::exp(-a * hi));
    const double span = std::abs(a) * (hi - lo);
    const auto cdf = [ymin, span](double y) { return std::clamp(std::log(y / ymin) / span, 0.0, 1.0); };
    out.report["pushforward_ks"] = pushforward_ks(ws.phi, ws.omega, cdf, o.count("ks_samples", 0), c.seed);
  }
  out.csv.emplace_back("blocks", csv.str());
  out.exit_code = exit_for(r.verdict);
  return out;
}

RunOutcome run_probe(const RunConfig& c) {
  const Options o(c, "probe-injectivity", {"samples", "delta_x", "delta_y", "threshold"});
  std::optional<double> dx;
  std::optional<double> dy;
  if (o.has("delta_x")) dx = o.number("delta_x", 0.0);
  if (o.has("delta_y")) dy = o.number("delta_y", 0.0);
  const CollisionReport r = essential_injectivity_probe(need(c.phase, "phase", "probe-injectivity"),
                                                        need(c.measure, "measure", "probe-injectivity"),
                                                        o.count("samples", 10000), dx, dy, c.seed);
  const double threshold = o.number("threshold", 0.0);
  const Verdict v = r.collision_fraction <= threshold ? Verdict::Pass : Verdict::Fail;
  RunOutcome out;
  std::ostringstream csv;
  csv << std::setprecision(17) << "pair";
  const int d = r.collisions.empty() ? 0 : static_cast<int>(r.collisions.front().first.size());
  for (int k = 0; k < d; ++k) csv << ",x" << k + 1;
  for (int k = 0; k < d; ++k) csv << ",xp" << k + 1;
  csv << "\n";
  for (std::size_t i = 0; i < r.collisions.size(); ++i) {
    csv << i;
    for (int k = 0; k < d; ++k) csv << "," << r.collisions[i].first[k];
    for (int k = 0; k < d; ++k) csv << "," << r.collisions[i].second[k];
    csv << "\n";
  }
  out.report = {{"samples", r.n_samples},
                {"pair_count", r.pair_count},
                {"colliding_samples", r.colliding_samples},
                {"collision_fraction", r.collision_fraction},
                {"delta_x", r.delta_x},
                {"delta_y", r.delta_y},
                {"threshold", threshold},
                {"meaning", "PASS means no collision was found; it is not a proof of injectivity"},
                {"verdict", to_string(v)}};
  out.csv.emplace_back("collisions", csv.str());
  out.exit_code = exit_for(v);
  return out;
}

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

std::vector<std::string> command_names() {
  return {"verify-onb", "frame-bounds", "tiling-check", "density", "reconstruct", "repdisc", "probe-injectivity"};
}

RunOutcome run_command(const std::string& command, const RunConfig& config) {
  RunOutcome out;
  if (command == "verify-onb") out = run_verify_onb(config);
  else if (command == "frame-bounds") out = run_frame_bounds(config);
  else if (command == "tiling-check") out = run_tiling(config);
  else if (command == "density") out = run_density(config);
  else if (command == "reconstruct") out = run_reconstruct(config);
  else if (command == "repdisc") out = run_repdisc(config);
  else if (command == "probe-injectivity") out = run_probe(config);
  else throw ConfigError("unknown command '" + command + "'");
  Json report = {{"schema_version", 1}, {"command", command}, {"config", config.raw}, {"seed", config.seed},
                 {"result", out.report}};
  out.report = std::move(report);
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exponential systems with non-linear phases: verification runner"};
  app.require_subcommand(1);
  std::string preset;
  std::string config_path;
  std::string out_path;
  int threads = 0;
  std::optional<std::uint64_t> seed;
  for (const std::string& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    auto* p = sub->add_option("--preset", preset, "built-in config name");
    auto* c = sub->add_option("--config", config_path, "path to a JSON config");
    p->excludes(c);
    sub->add_option("--out", out_path, "write the JSON report here (CSV artifacts alongside)");
    sub->add_option("--threads", threads, "worker threads (0: runtime default)");
    sub->add_option("--seed", seed, "override the config seed");
  }
  app.add_subcommand("list-presets", "print built-in configs");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (command == "list-presets") {
    for (const std::string& name : preset_names()) {
      std::string desc;
      std::string cmd;
      try {
        const Json j = Json::parse(*preset_text(name));
        desc = j.value("description", "");
        cmd = j.value("command", "");
      } catch (const std::exception&) {
      }
      out << std::left << std::setw(22) << name << std::setw(18) << cmd << desc << "\n";
    }
    return kExitPass;
  }

  try {
    std::string text;
    if (!preset.empty()) {
      const auto body = preset_text(preset);
      if (!body) throw ConfigError("unknown preset '" + preset + "' (see list-presets)");
      text = *body;
    } else if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot read config '" + config_path + "'");
      std::ostringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    } else {
      throw ConfigError("give --preset or --config");
    }
    RunConfig config = parse_config_text(text);
    if (seed) config.seed = *seed;
    if (!out_path.empty()) config.out = out_path;
    kernels::set_num_threads(threads);

    const auto t0 = std::chrono::steady_clock::now();
    RunOutcome result = run_command(command, config);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Json doc = result.report;
    doc["metadata"] = {{"timestamp", timestamp()}, {"elapsed_seconds", elapsed}, {"threads", kernels::num_threads()}};
    out << doc.dump(2) << "\n";
    if (!config.out.empty()) {
      const std::filesystem::path path(config.out);
      if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
      std::ofstream f(path);
      if (!f) throw ConfigError("cannot write '" + config.out + "'");
      f << doc.dump(2) << "\n";
      const std::filesystem::path stem = path.parent_path() / path.stem();
      for (const auto& [name, body] : result.csv) {
        std::ofstream cf(stem.string() + "_" + name + ".csv");
        cf << body;
      }
    }
    return result.exit_code;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << " (offset " << e.offset() << ")\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitError;
}

}  // namespace nlphase
