#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mvis/models.hpp"
#include "mvis/vcm.hpp"
#include "mvis/xi.hpp"

namespace mvis {

struct ScenarioConfig {
  std::string scenario;  // xy|heisenberg|shor|grover|cat|separable|custom-file
  int size = 14;
  std::string lattice;   // builder string; empty = scenario default for the size
  std::int64_t shor_I = 21, shor_x = 5;
  std::optional<int> grover_k;
  std::uint64_t seed = 1;
  std::string state_file;  // custom-file scenario
  int threads = 1;
  double gamma = 0.1;
};

struct ScenarioRun {
  ScenarioConfig cfg;
  StateVector state;
  std::string title;
  std::string cache_key;
  std::optional<LatticeGraph> lattice;
  std::optional<ShorLayout> shor;
  std::optional<GroverParams> grover;
  std::optional<double> energy;
  std::vector<int> stagger_signs;  // per-site {-1,+1}
  bool cache_hit = false;
};

// Builds (or loads from cache_dir, if given) the scenario state.
ScenarioRun build_scenario(const ScenarioConfig& cfg, const std::string& cache_dir = "");

// "Mx" "My" "Mz" "Mx_st" "My_st" "Mz_st" "Mx-z" "Mx_reg1" "My_st_reg1"
AdditiveOperator named_op(const std::string& name, const ScenarioRun& run);

// The operator pair the corresponding worked example plots.
std::pair<AdditiveOperator, AdditiveOperator> default_op_pair(const ScenarioRun& run);

std::vector<Pattern> scenario_dictionary(const ScenarioRun& run);

// N -> state builders for size scans. lattice_kind: "rect" (2 x N/2) or
// "chain". Scenarios without a size family (shor, custom) are rejected.
std::function<StateVector(int)> scenario_family(const std::string& scenario,
                                                std::uint64_t seed,
                                                const std::string& lattice_kind = "rect",
                                                int threads = 1);

std::string default_lattice_for(const std::string& scenario, int size,
                                const std::string& kind = "rect");

// --- report files -----------------------------------------------------------

void write_kernel_csv(const DiscreteKernel& k, int n_sites, const std::string& path);
DiscreteKernel read_kernel_csv(const std::string& path);

void write_field_csv(const XiField& f, const std::string& path);
void write_field_sidecar_json(const XiField& f, const NegativityResult& neg,
                              const std::string& path);
void write_scan_csv(const std::vector<ScanRow>& rows, const std::string& rule_name,
                    const std::string& path);

// {eigenvalues, p_estimate, S:[{label, coeffs, hermitian, variance}]}
void write_vcm_report_json(const VcmSpectrum& spec, const std::optional<PEstimate>& p,
                           const SetExtraction& s, const std::string& path);

// Plateau-merged local maxima of a field with height >= rel_threshold * max.
struct FieldMaximum {
  int i = 0, j = 0;
  double value = 0.0;
};
std::vector<FieldMaximum> local_maxima(const XiField& f, double rel_threshold);

}  // namespace mvis
