#pragma once

#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "torsionlab/io.hpp"

namespace tl {

/// Process exit codes shared by the CLI and the C API.
enum class Status { Ok = 0, CheckFailed = 1, InputError = 2, Divergent = 3, Internal = 4 };

/// InputError for malformed or inconsistent inputs, Divergent for DivergentDeterminant and
/// IllConditioned, Internal for anything else.
Status status_for(const std::exception& e);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

struct ReportCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string oracle;
  std::string detail;
};

struct RunReport {
  std::string command;
  /// Digest of the canonical dump of `inputs`.
  std::string inputs_digest;
  io::Json inputs = io::Json::object();
  io::Json results = io::Json::object();
  std::vector<ReportCheck> checks;
  /// Set when the computation ended in an unresolved or divergent verdict.
  bool divergent = false;
  /// Seconds; only emitted when requested.
  double wall_time = 0.0;

  static constexpr double kNoTolerance = std::numeric_limits<double>::quiet_NaN();

  /// Stores {"value", "tolerance", "oracle"} under `key`.
  void value(const std::string& key, const io::Json& v, double tolerance = kNoTolerance,
             const std::string& oracle = "none");
  /// Adds a check and the matching result entry.
  void check(const std::string& name, double residual, double tolerance, const std::string& oracle,
             std::optional<bool> pass = std::nullopt, const std::string& detail = "");
  void seal();

  bool passed() const;
  Status status() const;
  io::Json to_json(bool timing = false) const;
  std::string dump(bool pretty = false, bool timing = false) const;
};

RunReport cmd_torsion(const io::Json& complex);
RunReport cmd_fkdet(const io::Json& op);

/// check ∈ {volume, composition, cmm, milnor}.
RunReport cmd_cone(const io::Json& input, const std::string& check);

struct MorseOptions {
  /// "", "hermitian" or "subdivision".
  std::string anomaly;
  /// Subdivision point; defaults to the middle of the first cell.
  std::optional<double> at;
  double spacing = 0.02;
};

/// `mu` is required for the Hermitian anomaly (a list of two structures) and optional otherwise.
RunReport cmd_morse(const io::Json& morse, const io::Json& rep, const io::Json* mu, const MorseOptions& opt);

struct CircleOptions {
  /// det, relative, witten, euler or product.
  std::string mode = "det";
  std::optional<double> theta;
  std::optional<io::Json> holonomy;
  std::optional<io::Json> mu;
  int chi_n = 1;
  std::vector<double> witten_t;
  std::size_t grid = 1024;
};

RunReport cmd_circle(const CircleOptions& opt);

RunReport cmd_fit(const std::string& csv_text, const ExpansionBasis& basis, const std::string& source = "<csv>");

/// profile ∈ {smoke, desk, deep}.
RunReport cmd_verify_all(std::uint64_t seed, const std::string& profile, unsigned threads = 0);

}  // namespace tl
