#pragma once

#include "fqst/experiments.hpp"
#include "fqst/topology.hpp"

#include <string>

namespace fqst {

/// One file drives every subcommand: a shared `model` / `disorder` block plus a
/// section per subcommand. Missing keys keep the defaults below.
struct RunConfig {
  YJunctionSpec model = YJunctionSpec::ideal(3, 2, 2);
  std::string preset = "ideal";
  DisorderSpec disorder;
  std::uint64_t seed = 20240501;
  int threads = 0;

  PhaseDiagramConfig phase_diagram;

  struct Spectrum {
    ProtocolKind protocol = ProtocolKind::qst_stepwise;
    int periods_per_step = 40;
    int total_periods = 0;
    int sample_every = 1;
  } spectrum;

  struct Entangle {
    int periods_per_step = 200;
    double power = restore_power;
    int record_every = 1;
    int phase_periods = 8;  // free-evolution periods for the relative-phase read-out
  } entangle;

  struct Transfer {
    ProtocolKind mode = ProtocolKind::qst_stepwise;
    int periods_per_step = 40;
    int total_periods = 0;
    Mode input = Mode::zero;
    int record_every = 1;
    int spectrum_every = 0;
  } transfer;

  struct Sweep {
    ProtocolKind protocol = ProtocolKind::qst_stepwise;
    std::vector<double> W{0.0, 0.05, 0.5};
    int realizations = 100;
    int periods_per_step = 70;
    int total_periods = 0;
    std::vector<DisorderFamily> families;
  } disorder_sweep;

  struct Compare {
    ProtocolKind a = ProtocolKind::qst_stepwise;
    ProtocolKind b = ProtocolKind::qst_direct;
    std::vector<double> W{0.0, 0.05, 0.1, 0.2};
    int realizations = 100;
    int periods_per_step = 150;
    std::vector<DisorderFamily> families;
  } compare;

  struct Static {
    ProtocolKind mode = ProtocolKind::static_stepwise;
    StaticChainConfig chain;
    std::vector<double> W{0.0, 0.1, 0.2};
    int realizations = 100;
    int spectrum_every = 50;
  } static_chain;

  struct Oracle {
    int samples_per_step = 5;
  } oracle;
};

/// Parses YAML text. Unknown keys and malformed values are ConfigErrors.
RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::string& path);

/// Fully resolved configuration as JSON (for manifests).
std::string config_to_json(const RunConfig& cfg);

/// The nonideal couplings used in the robustness study: J1 = 1.5i everywhere,
/// j2 = 3i on L and M, j2 = -0.1i on R.
YJunctionSpec nonideal_spec(int n_left, int n_middle, int n_right);

/// SweepConfig seeded from the shared blocks of a RunConfig.
SweepConfig sweep_config(const RunConfig& cfg, ProtocolKind kind, int periods_per_step, int total_periods,
                         const std::vector<double>& W, int realizations, const std::vector<DisorderFamily>& families);

}  // namespace fqst
