#include "torsionlab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "torsionlab/circle.hpp"
#include "torsionlab/errors.hpp"
#include "torsionlab/suite.hpp"

namespace tl {

using io::Json;

Status status_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    if (err->kind() == ErrorKind::DivergentDeterminant || err->kind() == ErrorKind::IllConditioned)
      return Status::Divergent;
    return Status::InputError;
  }
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return Status::InputError;
  return Status::Internal;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunReport::value(const std::string& key, const Json& v, double tolerance, const std::string& oracle) {
  Json e = Json::object();
  e["value"] = v;
  e["tolerance"] = std::isnan(tolerance) ? Json(nullptr) : Json(tolerance);
  e["oracle"] = oracle;
  results[key] = std::move(e);
}

void RunReport::check(const std::string& name, double residual, double tolerance, const std::string& oracle,
                      std::optional<bool> pass, const std::string& detail) {
  bool ok = pass.value_or(residual <= tolerance);
  checks.push_back({name, residual, tolerance, ok, oracle, detail});
}

void RunReport::seal() { inputs_digest = fnv1a_hex(inputs.dump()); }

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ReportCheck& c) { return c.pass; });
}

Status RunReport::status() const {
  if (divergent) return Status::Divergent;
  return passed() ? Status::Ok : Status::CheckFailed;
}

Json RunReport::to_json(bool timing) const {
  Json j = Json::object();
  j["command"] = command;
  j["inputs_digest"] = inputs_digest;
  j["results"] = results;
  Json cs = Json::array();
  for (const auto& c : checks) {
    Json e = Json::object();
    e["name"] = c.name;
    e["residual"] = io::number(c.residual);
    e["tolerance"] = io::number(c.tolerance);
    e["oracle"] = c.oracle;
    e["pass"] = c.pass;
    if (!c.detail.empty()) e["detail"] = c.detail;
    cs.push_back(std::move(e));
  }
  j["checks"] = std::move(cs);
  j["passed"] = passed();
  j["status"] = static_cast<int>(status());
  if (timing) j["wall_time"] = wall_time;
  return j;
}

std::string RunReport::dump(bool pretty, bool timing) const { return to_json(timing).dump(pretty ? 2 : -1); }

namespace {

constexpr double kPi = std::numbers::pi;

Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(io::number(x));
  return a;
}

void add_check(RunReport& r, const std::string& name, const CheckResult& c, const std::string& oracle) {
  r.check(name, c.residual, c.tolerance, oracle, c.pass, c.detail);
}

Json verdict_json(const DetClassVerdict& v) {
  Json j = Json::object();
  j["state"] = det_class_name(v.state);
  j["is_determinant_class"] = v.is_determinant_class;
  j["limit"] = io::number(v.limit);
  j["divergence_rate_estimate"] = io::number(v.divergence_rate_estimate);
  j["near_kernel_measure"] = io::number(v.near_kernel_measure);
  j["diagnostics"] = v.diagnostics;
  return j;
}

const Operator& structure_holonomy(const Representation& rho, const Json* mu) {
  if (mu && mu->is_object() && mu->contains("generator") && (*mu)["generator"].is_string()) {
    auto it = rho.generators.find((*mu)["generator"].get<std::string>());
    require(it != rho.generators.end(), ErrorKind::Parse, "/generator: not a generator of the representation");
    return it->second;
  }
  require(rho.generators.size() == 1, ErrorKind::InvalidArgument,
          "structure: name the generator carrying the circle holonomy with \"generator\"");
  return rho.generators.begin()->second;
}

double default_subdivision_point(const MorseDatum& m, double spacing) {
  std::vector<double> pos;
  for (const auto& p : m.points) {
    require(!std::isnan(p.position), ErrorKind::InvalidArgument, "subdivision: every critical point needs a position");
    pos.push_back(p.position);
  }
  std::sort(pos.begin(), pos.end());
  double a = pos[0], b = pos.size() > 1 ? pos[1] : pos[0] + 1.0;
  return std::fmod(a + 0.5 * (b - a) - 0.5 * spacing, 1.0);
}

Operator holonomy_from(const CircleOptions& opt) {
  if (opt.holonomy) return io::read_operator(*opt.holonomy, "/holonomy");
  require(opt.theta.has_value(), ErrorKind::InvalidArgument, "circle: give --theta or --holonomy");
  return Operator::scalar(Mat::Constant(1, 1, std::polar(1.0, 2.0 * kPi * *opt.theta)));
}

}  // namespace

RunReport cmd_torsion(const Json& complex) {
  RunReport r;
  r.command = "torsion";
  r.inputs["complex"] = complex;
  r.seal();
  HilbertComplex c = io::read_complex(complex);
  TorsionReport t = torsion(c);
  r.value("log_torsion", t.log_torsion);
  r.value("log_torsion_reduced", t.log_torsion_reduced, 1e-8, "log_torsion");
  r.value("log_det_laplacian", numbers(t.log_det_laplacian));
  r.value("log_det_reduced", numbers(t.log_det_reduced));
  r.value("reduced_betti", numbers(t.reduced_betti), kAcyclicTol, "none");
  r.value("acyclic", t.acyclic);
  r.value("euler_characteristic", c.euler_characteristic());
  Json dc = Json::array();
  for (const auto& v : t.determinant_class) dc.push_back(det_class_name(v.state));
  r.value("determinant_class", dc);
  r.check("d_squared", c.d_squared_defect(), kComplexTol, "zero");
  r.check("laplacian_vs_reduced", std::abs(t.log_torsion - t.log_torsion_reduced), 1e-8,
          "torsion from the reduced Laplacians");
  if (t.direct_reliable)
    r.check("stacked_svd", std::abs(t.log_torsion_direct - t.log_torsion), 1e-8,
            "log det' of each Laplacian from the SVD of the stacked differentials");
  return r;
}

RunReport cmd_fkdet(const Json& op_json) {
  RunReport r;
  r.command = "fkdet";
  r.inputs["operator"] = op_json;
  r.seal();
  Operator op = io::read_operator(op_json);
  try {
    FkResult f = fk_log_det_report(op);
    r.value("log_det", f.log_det, f.error_estimate, "none");
    r.value("determinant_class", f.verdict.is_determinant_class);
    r.value("verdict", verdict_json(f.verdict));
    r.value("fibers", f.fibers);
    r.value("rank_jump_measure", f.rank_jump_measure);
    if (f.verdict.state == DetClass::Unresolved) r.divergent = true;
  } catch (const DivergentDeterminant&) {
    DetClassVerdict v = determinant_class_check(op);
    r.value("log_det", "-inf");
    r.value("determinant_class", false);
    r.value("verdict", verdict_json(v));
    r.divergent = true;
  }
  return r;
}

RunReport cmd_cone(const Json& input, const std::string& check) {
  RunReport r;
  r.command = "cone";
  r.inputs["check"] = check;
  r.inputs["input"] = input;
  r.seal();
  if (check == "volume") {
    ComplexMorphism f = io::read_morphism(input);
    CheckResult c = check_cone_volume(f, 1e-8);
    std::vector<double> vols;
    for (const auto& fj : f.f) vols.push_back(log_vol(fj));
    r.value("log_torsion_cone", c.lhs);
    r.value("alternating_log_vol", c.rhs, 1e-8, "log_torsion_cone");
    r.value("log_vol", numbers(vols));
    add_check(r, "cone_volume", c, "alternating sum of log vol(f_j)");
  } else if (check == "composition") {
    auto [f1, f2] = io::read_composition(input);
    CheckResult c = check_composition(f1, f2, 1e-8);
    r.value("log_torsion_composite", c.lhs);
    r.value("sum_of_factors", c.rhs, 1e-8, "log_torsion_composite");
    add_check(r, "composition", c, "cone torsions of the two factors");
  } else if (check == "cmm") {
    auto in = io::read_coupled(input);
    CheckResult c = check_cmm(in.c1, in.c2, in.coupling, 1e-8);
    CheckResult d = check_cmm_derivative(in.c1, in.c2, in.coupling, 1.0, 1e-4, 1e-6);
    r.value("log_torsion_total", c.lhs);
    r.value("sum_of_blocks", c.rhs, 1e-8, "log_torsion_total");
    r.value("derivative_at_1", d.lhs, 1e-6, "zero");
    add_check(r, "cmm_additivity", c, "log T(C1) + log T(C2)");
    add_check(r, "cmm_derivative", d, "zero");
  } else if (check == "milnor") {
    bool explicit_sequence = input.is_object() && input.contains("sub");
    ShortExactSequence s = explicit_sequence ? io::read_sequence(input) : cone_sequence(io::read_morphism(input));
    MilnorReport m = milnor_check(s, 1e-7);
    r.value("log_torsion_sub", m.log_t_sub);
    r.value("log_torsion_middle", m.log_t_middle);
    r.value("log_torsion_quotient", m.log_t_quotient);
    r.value("log_torsion_long_sequence", m.log_t_long);
    r.value("short_sequence_sum", m.short_sequence_sum);
    add_check(r, "milnor", m.result, "torsions of the sub, quotient and long exact sequence");
  } else {
    fail(ErrorKind::InvalidArgument, "cone: unknown check \"" + check + "\" (volume, composition, cmm, milnor)");
  }
  return r;
}

RunReport cmd_morse(const Json& morse, const Json& rep, const Json* mu, const MorseOptions& opt) {
  RunReport r;
  r.command = "morse";
  r.inputs["anomaly"] = opt.anomaly;
  r.inputs["morse"] = morse;
  r.inputs["representation"] = rep;
  r.inputs["mu"] = mu ? *mu : Json(nullptr);
  if (opt.anomaly == "subdivision") {
    r.inputs["at"] = opt.at ? Json(*opt.at) : Json(nullptr);
    r.inputs["spacing"] = opt.spacing;
  }
  r.seal();
  MorseDatum m = io::read_morse(morse, "/morse");
  Representation rho = io::read_representation(rep, "/representation");

  if (opt.anomaly.empty()) {
    HilbertComplex c = mu ? build_complex(m, rho, io::read_structure(*mu, structure_holonomy(rho, mu), "/mu"))
                          : build_complex(m, rho);
    TorsionReport t = torsion(c);
    r.value("log_torsion", t.log_torsion);
    r.value("modules", c.dims());
    r.value("reduced_betti", numbers(t.reduced_betti), kAcyclicTol, "none");
    r.value("acyclic", t.acyclic);
    r.check("d_squared", c.d_squared_defect(), kComplexTol, "zero");
  } else if (opt.anomaly == "hermitian") {
    require(mu != nullptr, ErrorKind::InvalidArgument, "morse --anomaly hermitian: needs a structure file");
    const Json* list = mu;
    if (mu->is_object() && mu->contains("structures")) list = &(*mu)["structures"];
    require(list->is_array() && list->size() == 2, ErrorKind::Parse,
            "/mu: expected two structures (an array or {\"structures\": [...]})");
    const Operator& a = structure_holonomy(rho, mu);
    HermitianStructure mu1 = io::read_structure((*list)[0], a, "/mu/0");
    HermitianStructure mu2 = io::read_structure((*list)[1], a, "/mu/1");
    CheckResult c = hermitian_anomaly_check(m, rho, mu1, mu2, 1e-8);
    r.value("log_torsion_mu1", log_torsion(build_complex(m, rho, mu1)));
    r.value("log_torsion_mu2", log_torsion(build_complex(m, rho, mu2)));
    r.value("torsion_difference", c.lhs);
    r.value("anomaly_sum", c.rhs, 1e-8, "torsion_difference");
    add_check(r, "hermitian_anomaly", c, "signed sum of V(mu1, mu2) over critical points");
  } else if (opt.anomaly == "subdivision") {
    const Operator& a = structure_holonomy(rho, mu);
    HermitianStructure s = mu ? io::read_structure(*mu, a, "/mu") : canonical_structure(a);
    double at = opt.at.value_or(default_subdivision_point(m, opt.spacing));
    MorseDatum fine = subdivide_circle(m, at, opt.spacing);
    SubdivisionReport rep_s = subdivision_check(m, fine, rho, s, 1e-8);
    r.value("subdivision_point", at);
    r.value("log_torsion_coarse", rep_s.log_t_coarse);
    r.value("log_torsion_fine", rep_s.log_t_fine);
    r.value("log_torsion_cone", rep_s.log_t_cone, 1e-8, "omega");
    r.value("omega", rep_s.omega_fine_coarse);
    add_check(r, "cone_vs_omega", rep_s.cone_vs_omega, "omega(fine, coarse)");
    add_check(r, "torsion_difference", rep_s.torsion_difference, "omega(fine, coarse)");
  } else {
    fail(ErrorKind::InvalidArgument, "morse: unknown anomaly \"" + opt.anomaly + "\" (hermitian, subdivision)");
  }
  return r;
}

RunReport cmd_circle(const CircleOptions& opt) {
  RunReport r;
  r.command = "circle";
  r.inputs["mode"] = opt.mode;
  r.inputs["theta"] = opt.theta ? Json(*opt.theta) : Json(nullptr);
  r.inputs["holonomy"] = opt.holonomy ? *opt.holonomy : Json(nullptr);
  r.inputs["mu"] = opt.mu ? *opt.mu : Json(nullptr);
  if (opt.mode == "product") r.inputs["chi_n"] = opt.chi_n;
  if (opt.mode == "witten") {
    r.inputs["witten_t"] = opt.witten_t;
    r.inputs["grid"] = opt.grid;
  }
  r.seal();

  if (opt.mode == "det" || opt.mode == "relative") {
    require(opt.theta.has_value(), ErrorKind::InvalidArgument, "circle --mode " + opt.mode + ": needs --theta");
    double th = *opt.theta;
    if (opt.mode == "det") {
      double v = zeta_det_circle(th), s = std::sin(kPi * th), oracle = 4.0 * s * s;
      r.value("det", v, 1e-6, "4 sin^2(pi theta)");
      r.value("log_det", std::log(v));
      r.check("det_closed_form", std::abs(v - oracle), 1e-6, "4 sin^2(pi theta)");
    } else {
      double v = relative_torsion_circle_unitary(th);
      r.value("log_relative_torsion", v, 1e-6, "zero");
      r.check("relative_torsion_vanishes", std::abs(v), 1e-6, "zero");
    }
  } else if (opt.mode == "witten") {
    std::vector<double> twists{opt.theta.value_or(0.0)};
    std::vector<double> ts = opt.witten_t.empty() ? std::vector<double>{20, 35, 50, 65, 80} : opt.witten_t;
    if (ts.size() == 1) {
      WittenSpectrum w = witten_spectrum_circle(ts[0], opt.grid, twists);
      std::vector<double> low(w.eigenvalues.begin(),
                              w.eigenvalues.begin() + static_cast<long>(std::min<std::size_t>(8, w.eigenvalues.size())));
      r.value("small_count", w.small_count, 0.0, "number of minima");
      r.value("first_large", w.first_large);
      r.value("lowest_eigenvalues", numbers(low));
      r.value("tail_weight", w.tail_weight, 1e-10, "none");
      r.value("resolved", w.resolved);
      r.check("small_count", std::abs(static_cast<double>(w.small_count) - static_cast<double>(twists.size())), 0.0,
              "number of minima");
      r.divergent = !w.resolved;
    } else {
      WittenSplitReport w = witten_split(ts, opt.grid, twists);
      r.value("t", numbers(w.t));
      r.value("small_counts", w.small_counts);
      r.value("expected_small", w.expected_small);
      r.value("first_large", numbers(w.first_large));
      r.value("slope", w.slope);
      r.value("intercept", w.intercept);
      r.value("resolved", w.resolved);
      double miss = 0.0;
      for (auto c : w.small_counts)
        miss = std::max(miss, std::abs(static_cast<double>(c) - static_cast<double>(w.expected_small)));
      r.check("small_count", miss, 0.0, "number of minima");
      r.check("large_eigenvalue_growth", std::max(0.0, -w.slope), 0.0, "positive fitted slope", w.slope > 0.0);
      r.divergent = !w.resolved;
    }
  } else if (opt.mode == "euler") {
    Operator a = holonomy_from(opt);
    HermitianStructure mu = opt.mu ? io::read_structure(*opt.mu, a, "/mu") : canonical_structure(a);
    EulerInvariantResult e = euler_invariant_circle({a, mu}, canonical_structure(a));
    r.value("value", e.value, 1e-6, "closed_form");
    r.value("theta_term", e.theta_term);
    r.value("v_term", e.v_term);
    r.value("euler_term", e.euler_term);
    r.value("closed_form", e.closed_form);
    r.value("admissibility_defect", e.admissibility_defect, 1e-9, "zero");
    r.check("closed_form", std::abs(e.value - e.closed_form), 1e-6,
            "-1/2 log det A + 1/2 (log det mu(t1) - log det mu(t2))");
  } else if (opt.mode == "product") {
    Operator a = holonomy_from(opt);
    ProductInvariantResult p = euler_invariant_product(a, opt.chi_n);
    r.value("pipeline", p.pipeline, 1e-4, "formula");
    r.value("formula", p.formula);
    r.value("circle_value", p.circle.value);
    r.check("product_formula", p.residual, 1e-4, "-chi(N)/2 log det (A*A)^(1/2)");
  } else {
    fail(ErrorKind::InvalidArgument,
         "circle: unknown mode \"" + opt.mode + "\" (det, relative, witten, euler, product)");
  }
  return r;
}

RunReport cmd_fit(const std::string& csv_text, const ExpansionBasis& basis, const std::string& source) {
  RunReport r;
  r.command = "fit";
  auto [t, g] = io::read_samples_csv(csv_text, source);
  r.inputs["t"] = t;
  r.inputs["values"] = g;
  r.inputs["exponents"] = basis.exponents;
  r.inputs["log_exponents"] = basis.log_exponents;
  r.inputs["remainder"] = basis.remainder;
  r.seal();
  AsymptoticExpansion e = fit_expansion(t, g, basis);
  r.value("exponents", numbers(basis.exponents));
  r.value("a", numbers(e.a));
  r.value("log_exponents", numbers(basis.log_exponents));
  r.value("b", numbers(e.b));
  r.value("remainder_exponents", numbers(basis.remainder));
  r.value("c", numbers(e.c));
  r.value("free_term", e.free_term);
  r.value("residual", e.residual, 1e-8, "none");
  r.value("residual_flagged", e.residual > 1e-8);
  r.value("condition", e.condition, kMaxFitCondition, "none");
  return r;
}

RunReport cmd_verify_all(std::uint64_t seed, const std::string& profile, unsigned threads) {
  RunReport r;
  r.command = "verify-all";
  Profile p = parse_profile(profile);
  r.inputs["seed"] = seed;
  r.inputs["profile"] = profile_name(p);
  r.seal();
  SuiteSettings s = settings_for(p);
  r.value("max_dim", s.max_dim);
  r.value("fibers", s.fibers);
  r.value("instances", s.instances);
  for (const auto& c : run_suite(seed, p, threads)) {
    std::string detail = c.module + "; " + std::to_string(c.instances) + " instances";
    if (!c.detail.empty()) detail += "; " + c.detail;
    r.check(c.name, c.residual, c.tolerance, c.oracle, c.pass, detail);
  }
  return r;
}

}  // namespace tl
