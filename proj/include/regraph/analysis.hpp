#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "regraph/flowgraph.hpp"
#include "regraph/random.hpp"
#include "regraph/rfa.hpp"
#include "regraph/topology.hpp"

namespace regraph {

// ---- hypergeometric oracle -------------------------------------------------

// draws * successes / pop, exact.
Rational hypergeom_mean(std::uint64_t pop, std::uint64_t successes, std::uint64_t draws);

// Sequential urn draws without replacement.
std::uint64_t hypergeom_sample(std::uint64_t pop, std::uint64_t successes, std::uint64_t draws,
                               RandomSource& rng);

// C(successes, k) C(pop - successes, draws - k) / C(pop, draws).
double hypergeom_pmf(std::uint64_t pop, std::uint64_t successes, std::uint64_t draws, std::uint64_t k);

// ---- chi-square -------------------------------------------------------------

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Goodness of fit. Adjacent cells are pooled left to right until every
// pooled cell expects at least `min_expected`.
ChiSquare chi_square(std::span<const double> observed, std::span<const double> expected,
                     double min_expected = 5.0);

// One draw from a hypergeometric law whose parameters differ per
// observation, as happens when conditioning on each replica's history.
struct HypergeomObservation {
  std::uint64_t pop = 0;
  std::uint64_t successes = 0;
  std::uint64_t draws = 0;
  std::uint64_t observed = 0;
};

// Pools the observations by shortfall (draws - observed) and compares the
// counts with the summed conditional probabilities.
ChiSquare conditional_hypergeom_test(std::span<const HypergeomObservation> obs);

// ---- expansion --------------------------------------------------------------

// Per-depth counts for one replica, d = 0..d*.
struct ExpansionStats {
  std::uint64_t n = 0;
  double c = 0.5;
  int dstar = 0;
  std::vector<std::uint64_t> count;    // N_d
  std::vector<std::uint64_t> layer1;   // N'_d: reached over a layer-1 edge
  std::vector<std::uint64_t> layer2;   // N''_d: reached over layer 2 only
  std::vector<std::uint64_t> flow1;    // X_d

  std::uint64_t within(int d) const;   // N_{<=d}
  std::uint64_t above(int d) const { return n - within(d); }  // N_{>d}, N_{>-1} = N
};

ExpansionStats measure_expansion(const Network& net, const RfaState& state);

struct TheoryBounds {
  int d1 = 0;
  int d2 = 0;
  int dstar = 0;
  bool regimes_ordered = false;  // d1 < d2 <= d*
  std::vector<double> phi;       // phi_d, d = 0..d*-1
  std::vector<double> sigma;     // 1 - 2 N_d / N_{>d-1} - phi_d
};

TheoryBounds theory_bounds(const ExpansionStats& stats);

// N_h = 2 N_{h-1} for every h <= d.
bool is_binary_up_to(const ExpansionStats& stats, int d);
// 1 - d 2^(2d) / (N - 2^d)
double binary_tree_bound(std::uint64_t n, int d);
// 1 - 2 (1 + eps) log2 N / N^(1/3)
double expansion_bound(std::uint64_t n, double eps);

struct ExpansionEvent {
  bool growth = false;   // N_d >= 2 phi_{d-1} N_{d-1} for all d <= d*
  bool mass = false;     // N_{d*} >= (1 - eps) N / ln(N)^c
  bool holds() const { return growth && mass; }
};

ExpansionEvent check_expansion_event(const ExpansionStats& stats, const TheoryBounds& bounds, double eps);

// max over 1 <= d <= d* of |X_d / N_d - 1/2|.
double half_split_deviation(const ExpansionStats& stats);
bool check_half_split(const ExpansionStats& stats, double eps);

// Conditional draws behind N'_{d+1} and N''_{d+1} for d = 0..d*-1.
void hypergeom_observations(const ExpansionStats& stats, int d, HypergeomObservation& first,
                            HypergeomObservation& second);

// 2 N_{>d} N_d / N_{>d-1} - N_{>d} N_d^2 / N_{>d-1}^2
double expected_next_depth(const ExpansionStats& stats, int d);

// ---- contraction ------------------------------------------------------------

// gamma_h with the sequence continued past its end: once a shell is empty
// the ratio stays 1 while peers remain; empty when everyone was reached.
std::optional<double> gamma_at(const ContractionStats& stats, int h);
std::optional<std::uint64_t> remaining_at(const ContractionStats& stats, int h);

struct ContractionRow {
  int h = 0;
  std::size_t samples = 0;
  double mean_increment = 0.0;  // mean of gamma_{h+1} - gamma_h
  double std_error = 0.0;
  bool martingale_ok = false;
  double step_frequency = 0.0;  // P[gamma_{h+1} <= gamma_h + eps]
  double step_bound = 0.0;      // mean of 1 - 2 exp(-eps^2 S_{>h} / 2)
  bool step_ok = false;
};

struct ContractionReport {
  std::vector<ContractionRow> rows;
  double hstar_frequency = 0.0;  // fraction with h* <= (1 + eps_h) ln N
  double hstar_limit = 0.0;
  double gamma1_frequency = 0.0;  // gamma_1 bound among replicas meeting its premise
  std::size_t gamma1_samples = 0;
  bool martingale_ok = false;
  bool step_ok = false;
  bool hstar_ok = false;
  bool pass() const { return martingale_ok && step_ok && hstar_ok; }
};

struct ContractionOptions {
  int max_h = 10;
  double eps = 0.1;         // gamma step slack
  double margin = 0.05;     // additive slack on the step bound
  double hstar_eps = 0.2;   // h* <= (1 + hstar_eps) ln N
  double hstar_level = 0.95;
  double z = 3.0;           // standard errors allowed on the mean increment
};

ContractionReport check_contraction(std::span<const ContractionStats> stats, double c,
                                    const ContractionOptions& opt);

// gamma_1 <= 1 - 1/ln(N)^c, checked when S_1 >= N (1 - eps) / (2 ln(N)^c).
std::optional<bool> gamma1_bound_holds(const ContractionStats& stats, double c, double eps);

// ---- uniformity -------------------------------------------------------------

// Lehmer rank of a layer image over peers 1..n, in [0, n!).
std::uint64_t permutation_rank(std::span<const std::uint32_t> image);

struct UniformityReport {
  int n = 0;
  int flows = 0;
  std::uint64_t samples = 0;
  std::vector<ChiSquare> per_layer;
  std::vector<ChiSquare> pairwise;     // joint of layers (i, j), i < j
  double alpha = 1e-3;
  double corrected_alpha = 1e-3;       // Bonferroni over all tests
  double worst_z = 0.0;                // max |freq - exact| / sigma over per-layer cells (n <= 4)
  bool exact_checked = false;
  bool pass = false;
};

UniformityReport check_uniformity(int flows, int n, std::uint64_t samples, const RandomSource& rng,
                                  double alpha = 1e-3);

// ---- harness ----------------------------------------------------------------

struct ChurnStep {
  ChurnKind kind = ChurnKind::join;
  PeerId peer = kNoPeer;  // leave target
};

// `join` or `leave <id>` per line; blank lines and `#` comments skipped.
std::vector<ChurnStep> parse_churn_script(const std::string& text);
void apply_churn(Network& net, std::span<const ChurnStep> steps, const RandomSource& rng);

// Grows to n peers; before each join, with probability leave_rate, a random
// non-source peer leaves instead.
Network grow_with_churn(int flows, std::uint32_t n, double leave_rate, const RandomSource& rng);

struct SweepConfig {
  std::vector<std::uint32_t> sizes{10, 31, 100, 316, 1000, 3163};
  int flows = 4;
  std::vector<int> extra{0, 1, 2};
  int replicas = 100;
  std::uint64_t seed = 1;
  double c = 0.5;
  int slots = 0;           // 0 picks twice the deepest distance + 1
  double leave_rate = 0.0;
  int jobs = 1;
};

struct SweepRow {
  std::uint32_t n = 0;
  int flows = 0;
  int extra = 0;
  int replica = 0;
  std::size_t disconnected_before = 0;
  std::size_t disconnected_after = 0;
  std::size_t extra_uploaders = 0;
  int max_delay = 0;
  std::size_t delay_mismatches = 0;
};

std::vector<SweepRow> run_sweep(const SweepConfig& cfg);
// `N,M,K,replica,disconnected_before,disconnected_after,extra_uploaders,max_delay`
std::string sweep_csv(std::span<const SweepRow> rows);

struct SweepMean {
  std::uint32_t n = 0;
  int extra = 0;
  double disconnected_after = 0.0;
  double extra_uploaders = 0.0;
  double max_delay = 0.0;
};

std::vector<SweepMean> sweep_means(std::span<const SweepRow> rows);
// `N,K,mean_disconnected` and `N,K,mean_max_delay`
std::string disconnected_csv(std::span<const SweepMean> means);
std::string max_delay_csv(std::span<const SweepMean> means);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

// ---- verification suites ----------------------------------------------------

struct CheckResult {
  std::string check;
  std::uint64_t n = 0;
  int flows = 0;
  nlohmann::json params = nlohmann::json::object();
  double empirical = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  bool pass = false;
};

void to_json(nlohmann::json& j, const CheckResult& r);

struct SuiteConfig {
  std::uint64_t n = 0;
  int flows = 2;
  int replicas = 0;
  std::uint64_t seed = 1;
  double c = 0.5;
  double eps = 0.1;
  double margin = 0.05;
  double alpha = 1e-3;
};

std::vector<CheckResult> verify_uniformity(const SuiteConfig& cfg);

// Checks over already collected replicas. `event_level` replaces the
// asymptotic expansion bound (minus margin) when given.
std::vector<CheckResult> expansion_checks(std::span<const ExpansionStats> stats, const SuiteConfig& cfg,
                                          std::optional<double> event_level = std::nullopt);
std::vector<CheckResult> half_split_checks(std::span<const ExpansionStats> stats, const SuiteConfig& cfg,
                                           double split_eps, double level);
std::vector<CheckResult> contraction_checks(std::span<const ContractionStats> stats, const SuiteConfig& cfg,
                                            const ContractionOptions& opt);

// Binary prefix, expansion event, hypergeometric conditionals.
std::vector<CheckResult> verify_expansion(const SuiteConfig& cfg);
std::vector<CheckResult> verify_half_split(const SuiteConfig& cfg, double split_eps, double level);
std::vector<CheckResult> verify_contraction(const SuiteConfig& cfg, const ContractionOptions& opt);
// Random instances with n in [10, 1000] and M in {2, 4}: decomposition
// partition and simulated delay equal to distance.
std::vector<CheckResult> verify_delay(const SuiteConfig& cfg);
// Random churn script of cfg.n events (default 10^4) with structural
// invariants after every mutation, plus periodic assignment, decomposition,
// chunk-conservation and replay checks.
std::vector<CheckResult> verify_properties(const SuiteConfig& cfg);

// Tree, cycles and hanging peers cover every peer once; the source roots
// the tree; distances and cycle order follow the flow edges.
bool decomposition_is_partition(const FlowGraph& fg, const Decomposition& dec);

// Replicas of N-peer, two-flow networks. Replica r uses stream
// derive(r) of the seed: derive(1) for joins, derive(2) for the assignment.
std::vector<ExpansionStats> collect_expansion(std::uint64_t n, int replicas, std::uint64_t seed, double c);
std::vector<ContractionStats> collect_contraction(std::uint64_t n, int replicas, std::uint64_t seed, double c);

}  // namespace regraph
