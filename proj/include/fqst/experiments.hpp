#pragma once

#include "fqst/protocols.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fqst {

enum class ProtocolKind : std::uint8_t { qst_stepwise, qst_direct, static_original, static_stepwise, entangle };

std::string to_string(ProtocolKind k);
ProtocolKind protocol_kind_from_string(const std::string& s);
bool is_static(ProtocolKind k);

struct StaticChainConfig {
  int qubits = 21;
  double g = 1.0;
  double t_total = pi / 0.01;
  double dt = 0.01;
};

struct SweepConfig {
  YJunctionSpec model = YJunctionSpec::ideal(11, 4, 9);
  StaticChainConfig chain;
  ProtocolKind protocol = ProtocolKind::qst_stepwise;
  std::vector<double> W{0.0, 0.05, 0.5};
  int realizations = 100;
  int periods_per_step = 70;
  int total_periods = 0;  // direct transfer; 0 means periods_per_step * step count
  Mode mode = Mode::zero;
  std::vector<DisorderFamily> families;  // empty: every family the protocol touches
  std::uint64_t seed = 20240501;
  int threads = 0;  // 0: hardware concurrency
};

/// A runnable experiment: context, protocol, initial state and the target the
/// clean run is graded against.
struct Scenario {
  ModelContext ctx;
  Protocol protocol;
  StateVector initial;
  StateVector target;
  bool analytic_target = false;
  double dt = 0.0;  // continuous protocols
};

Scenario make_scenario(const SweepConfig& cfg);
/// Runs a scenario on a (possibly disordered) copy of its context.
EvolutionTrace run_scenario(const Scenario& s, const ModelContext& ctx, const TraceOptions& options = {});

/// True when every branch sits at the ideal point the closed-form modes assume.
bool is_ideal(const YJunctionSpec& spec);

struct SweepPoint {
  double W = 0.0;
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
  int n = 0;
  int failed = 0;
  std::vector<double> fidelities;  // per realization, NaN if failed
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double clean_fidelity = 0.0;  // clean run vs target
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  int total_periods = 0;
  double total_time = 0.0;
};

/// Seed of realization r at W index i: splitmix64 chained over (master, i, r).
std::uint64_t realization_seed(std::uint64_t master, std::size_t w_index, std::size_t realization);

/// Disorder-averaged fidelity against the clean final state. Realizations run on a
/// thread pool; results are stored by index so the aggregate does not depend on
/// scheduling.
SweepResult disorder_sweep(const SweepConfig& cfg);

struct Comparison {
  SweepResult a;
  SweepResult b;
  std::vector<int> verdict;  // sign(mean_a - mean_b) per W
  std::vector<double> mean_difference;  // paired mean of F_a - F_b
};

/// Paired sweep: both sides share the master seed so realization r at W index i
/// draws the same deviations. Unequal total evolution time is a ConfigError.
Comparison compare_protocols(const SweepConfig& a, const SweepConfig& b);

/// Frozen-coupling spectra every `sample_every` periods (slices for continuous
/// protocols), including period 0.
std::vector<SpectrumSample> spectrum_trace(const Scenario& s, int sample_every, int expected_zero = -1,
                                           int expected_pi = -1);

/// Disorder families a protocol kind touches.
std::vector<DisorderFamily> default_families(ProtocolKind k);

std::string sweep_config_json(const SweepConfig& cfg);
std::uint64_t config_hash(const std::string& text);

/// W,mean_F,std_F,min_F,max_F,n
void write_sweep_csv(const SweepResult& r, const std::string& path);
/// sample_period,min_gap,n_zero_modes,n_pi_modes
void write_gap_csv(const std::vector<SpectrumSample>& samples, const std::string& path);

}  // namespace fqst
