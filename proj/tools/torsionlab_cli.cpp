// Command-line front end over the C API.

#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "torsionlab/torsionlab.h"

namespace {

struct Output {
  bool pretty = false;
  bool timing = false;
};

int emit(tl_status s, tl_report* r, const Output& out) {
  if (r) {
    std::puts(tl_report_json(r, out.pretty, out.timing));
    tl_report_free(r);
  }
  if (s != TL_OK && s != TL_CHECK_FAILED && !(s == TL_DIVERGENT && r))
    std::fprintf(stderr, "torsionlab: error: %s\n", tl_last_error());
  return static_cast<int>(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Torsion invariants of cochain complexes of Hilbert modules"};
  app.set_version_flag("--version", std::string(tl_version()));
  app.require_subcommand(1);
  Output out;
  app.add_flag("--pretty", out.pretty, "Indent the JSON report");
  app.add_flag("--timing", out.timing, "Add wall_time to the report");
  app.fallthrough();

  std::string path;
  auto* torsion = app.add_subcommand("torsion", "Torsion of a complex file");
  torsion->add_option("complex", path, "Complex JSON")->required()->check(CLI::ExistingFile);

  auto* fkdet = app.add_subcommand("fkdet", "Fuglede-Kadison log-determinant of an operator file");
  fkdet->add_option("operator", path, "Operator JSON")->required()->check(CLI::ExistingFile);

  std::string check = "volume";
  auto* cone = app.add_subcommand("cone", "Mapping-cone identities");
  cone->add_option("input", path, "Morphism, composition, coupled or sequence JSON")
      ->required()
      ->check(CLI::ExistingFile);
  cone->add_option("--check", check, "Identity to verify")
      ->check(CLI::IsMember({"volume", "composition", "cmm", "milnor"}));

  std::string rep, mu, anomaly;
  double at = -1.0, spacing = 0.02;
  auto* morse = app.add_subcommand("morse", "Combinatorial torsion of Morse data and its anomalies");
  morse->add_option("morse", path, "Morse JSON")->required()->check(CLI::ExistingFile);
  morse->add_option("representation", rep, "Representation JSON")->required()->check(CLI::ExistingFile);
  morse->add_option("mu", mu, "Hermitian structure JSON (two structures for --anomaly hermitian)")
      ->check(CLI::ExistingFile);
  morse->add_option("--anomaly", anomaly, "Anomaly to verify")->check(CLI::IsMember({"hermitian", "subdivision"}));
  morse->add_option("--at", at, "Subdivision point in [0, 1)");
  morse->add_option("--spacing", spacing, "Distance between the inserted critical points")
      ->check(CLI::PositiveNumber);

  tl_circle_args cargs;
  tl_circle_args_init(&cargs);
  std::string mode = "det", holonomy, cmu;
  double theta = 0.0;
  std::vector<double> witten_t;
  std::size_t grid = 1024;
  auto* circle = app.add_subcommand("circle", "Circle determinants, Witten spectrum and Euler invariants");
  circle->add_option("--mode", mode, "det, relative, witten, euler or product")
      ->check(CLI::IsMember({"det", "relative", "witten", "euler", "product"}));
  auto* theta_opt = circle->add_option("--theta", theta, "Holonomy e^{2 pi i theta}");
  circle->add_option("--holonomy", holonomy, "Holonomy operator JSON")->check(CLI::ExistingFile);
  circle->add_option("--mu", cmu, "Hermitian structure JSON")->check(CLI::ExistingFile);
  circle->add_option("--chi-n", cargs.chi_n, "Euler characteristic of N for --mode product");
  circle->add_option("--witten-t", witten_t, "Deformation parameters")->expected(1, -1);
  circle->add_option("--grid", grid, "Collocation nodes for --mode witten")->check(CLI::PositiveNumber);

  std::vector<double> exponents, log_exponents, remainder;
  auto* fit = app.add_subcommand("fit", "Fit an asymptotic expansion to CSV samples t,value");
  fit->add_option("csv", path, "CSV file")->required()->check(CLI::ExistingFile);
  fit->add_option("--exponents", exponents, "Exponents i_1 > ... > 0")->expected(1, -1);
  fit->add_option("--log-exponents", log_exponents, "Exponents that also get a log t term")->expected(0, -1);
  fit->add_option("--remainder", remainder, "Negative powers for the remainder")->expected(0, -1);

  std::uint64_t seed = 7;
  std::string size = "desk";
  unsigned threads = 0;
  auto* verify = app.add_subcommand("verify-all", "Run the property suite");
  verify->add_option("--seed", seed, "Seed");
  verify->add_option("--size", size, "Profile")->check(CLI::IsMember({"smoke", "desk", "deep"}));
  verify->add_option("--threads", threads, "Worker threads (default TORSIONLAB_THREADS or the core count)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return TL_INPUT_ERROR;
  }

  tl_report* r = nullptr;
  tl_status s = TL_INTERNAL_ERROR;
  if (*torsion) {
    s = tl_cmd_torsion(path.c_str(), &r);
  } else if (*fkdet) {
    s = tl_cmd_fkdet(path.c_str(), &r);
  } else if (*cone) {
    s = tl_cmd_cone(path.c_str(), check.c_str(), &r);
  } else if (*morse) {
    s = tl_cmd_morse(path.c_str(), rep.c_str(), mu.empty() ? nullptr : mu.c_str(), anomaly.c_str(), at, spacing, &r);
  } else if (*circle) {
    cargs.mode = mode.c_str();
    cargs.has_theta = theta_opt->count() > 0;
    cargs.theta = theta;
    cargs.holonomy_path = holonomy.empty() ? nullptr : holonomy.c_str();
    cargs.mu_path = cmu.empty() ? nullptr : cmu.c_str();
    cargs.witten_t = witten_t.empty() ? nullptr : witten_t.data();
    cargs.witten_t_count = witten_t.size();
    cargs.grid = grid;
    s = tl_cmd_circle(&cargs, &r);
  } else if (*fit) {
    // A given but empty list must not read as "use the default".
    static const double none = 0.0;
    auto given = [&](const char* flag, const std::vector<double>& v) {
      return fit->count(flag) == 0 ? nullptr : v.empty() ? &none : v.data();
    };
    s = tl_cmd_fit(path.c_str(), given("--exponents", exponents), exponents.size(),
                   given("--log-exponents", log_exponents), log_exponents.size(), given("--remainder", remainder),
                   remainder.size(), &r);
  } else if (*verify) {
    s = tl_cmd_verify_all(seed, size.c_str(), threads, &r);
  }
  return emit(s, r, out);
}
