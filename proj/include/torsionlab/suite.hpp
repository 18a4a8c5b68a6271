#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "torsionlab/random.hpp"

namespace tl {

enum class Profile { Smoke, Desk, Deep };

Profile parse_profile(const std::string& name);
const char* profile_name(Profile p);

struct SuiteSettings {
  Profile profile = Profile::Desk;
  /// Largest module dimension of random instances.
  Index max_dim = 6;
  /// Fiber count for circle-fibered instances.
  std::size_t fibers = 4096;
  /// Random instances per check.
  int instances = 20;
};

SuiteSettings settings_for(Profile p);

struct SuiteCheck {
  std::string module;
  std::string name;
  std::string oracle;
  /// Largest residual over the instances.
  double residual = 0.0;
  double tolerance = 0.0;
  int instances = 0;
  bool pass = false;
  std::string detail;
};

struct SuiteEntry {
  std::string module;
  std::string name;
  std::function<SuiteCheck(Rng&, const SuiteSettings&)> run;
};

/// Every property check, in report order.
const std::vector<SuiteEntry>& suite_entries();

/// Worker count: TORSIONLAB_THREADS if set and positive, else the hardware concurrency.
unsigned suite_threads();

/// Runs every check; check i is seeded from (seed, i) only, so the output is independent of `threads`.
std::vector<SuiteCheck> run_suite(std::uint64_t seed, Profile profile, unsigned threads = 0);

}  // namespace tl
