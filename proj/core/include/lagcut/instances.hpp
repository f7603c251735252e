#pragma once

// Seeded instance generators and the plain-text instance format
// (grammar in docs/instance_format.md).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "lagcut/model.hpp"

namespace lagcut {

/// Fixed-algorithm PRNG with integer-only draws, so generated instances are
/// identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on {0, ..., n-1}, unbiased (rejection sampling). n >= 1.
  std::uint64_t below(std::uint64_t n);
  /// Uniform on {lo, ..., hi}.
  long uniform_int(long lo, long hi);
  bool bernoulli_half() { return (engine_() >> 63) != 0; }
  /// lo + (hi - lo) * k / steps with k uniform on {0..steps}.
  double grid(double lo, double hi, long steps);

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer over (seed, stream): fixed sub-seed derivation.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct SslpParams {
  int m = 5;  // sites
  int n = 10;  // clients
  int n_scenarios = 5;
  std::uint64_t seed = 0;
  int k = 1;  // instance number, used in the name
};

SipInstance gen_sslp(const SslpParams& p);

struct SnipParams {
  int nodes = 12;
  int arcs = 30;
  int interdictable = 8;
  double budget = 3.0;
  int n_scenarios = 4;
  std::uint64_t seed = 0;
  double r_lo = 0.3, r_hi = 0.9;
  double rho_lo = 0.1, rho_hi = 0.5;  // q_a = rho * r_a
  int max_retries = 64;
};

struct SnipArc {
  int tail = 0;
  int head = 0;
  double r = 1.0;
  double q = 1.0;
  int sensor = -1;  // first-stage column when interdictable
};

/// Network behind a generated SNIP instance, kept for oracle checks.
struct SnipNetwork {
  int nodes = 0;
  std::vector<SnipArc> arcs;
  std::vector<int> origin;       // per scenario
  std::vector<int> destination;  // per scenario
  std::vector<std::vector<double>> u;  // u[s][j]: best no-sensor reliability j -> destination
};

SipInstance gen_snip(const SnipParams& p, SnipNetwork* network = nullptr);

/// Maximum-reliability values to `target` over arcs weighted by r (Dijkstra on -log r).
std::vector<double> max_reliability_to(int nodes, const std::vector<SnipArc>& arcs, int target);

/// Small pure-integer instances with relatively complete recourse, sized for
/// enumeration oracles.
struct TinyParams {
  int n = 4;            // binary first-stage variables
  int n_scenarios = 3;
  int ny = 3;           // second-stage variables per scenario
  int rows = 3;         // second-stage rows per scenario
  int h_max = 3;
  bool cardinality = true;   // add sum x <= k
  bool integer_recourse = true;
  std::uint64_t seed = 0;
};

SipInstance gen_tiny(const TinyParams& p);

void write_instance(const SipInstance& inst, std::ostream& out);
void write_instance(const SipInstance& inst, const std::filesystem::path& path);
SipInstance read_instance(std::istream& in);
SipInstance read_instance(const std::filesystem::path& path);

/// Shortest decimal text that reads back to the same double ("inf"/"-inf").
std::string format_double(double v);

}  // namespace lagcut
