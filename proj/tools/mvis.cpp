// mvis - macroscopic-superposition visualization toolkit CLI
//
// Subcommands:
//   analyze  full pipeline: state -> VCM -> S set -> Xi kernels/fields/plots
//   scan     negativity vs W at fixed size, or vs N under a W rule
//   state    build a scenario state and dump it
//   vcm      VCM spectrum + S extraction only
//   xi       kernels/fields for explicit operators, skipping the VCM stage

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvis/pipeline.hpp"
#include "mvis/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOpts {
  std::string out = "mvis_out";
  int threads = 1;
  std::uint64_t seed = 1;
  std::string format = "csv";
  std::string config_file;
};

struct AnalyzeOpts {
  mvis::ScenarioConfig sc;
  std::string ops = "auto";
  std::vector<double> W = {0.0, 2.0};
  std::string p_sizes = "auto";  // comma list, "auto", or "none"
  std::string family_lattice = "rect";
};

std::string wtag(double w) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", w);
  std::string s = buf;
  for (auto& c : s)
    if (c == '.') c = '_';
  return s;
}

std::vector<int> parse_sizes(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty()) out.push_back(std::stoi(cell));
  }
  if (out.empty()) throw mvis::ConfigError("empty size list");
  return out;
}

std::pair<mvis::AdditiveOperator, mvis::AdditiveOperator> resolve_ops(
    const std::string& spec, const mvis::ScenarioRun& run,
    const mvis::SetExtraction* extraction) {
  if (spec == "auto") return default_op_pair(run);
  if (spec == "S") {
    if (!extraction || extraction->members.size() < 2)
      throw mvis::ConfigError("--ops S needs at least two extracted operators");
    return {extraction->members[0].op, extraction->members[1].op};
  }
  const auto comma = spec.find(',');
  if (comma == std::string::npos)
    throw mvis::ConfigError("--ops wants 'auto', 'S', or two names like Mx,My");
  return {mvis::named_op(spec.substr(0, comma), run),
          mvis::named_op(spec.substr(comma + 1), run)};
}

// p-estimate sizes for family scenarios; shor/custom have no family
std::optional<std::vector<int>> default_p_sizes(const std::string& scenario) {
  if (scenario == "shor" || scenario == "custom-file") return std::nullopt;
  return std::vector<int>{8, 10, 12, 14};
}

void emit_field_products(const mvis::DiscreteKernel& kernel, double W,
                         const std::string& stem, const std::string& title,
                         const GlobalOpts& g, json& negativity_table) {
  using namespace mvis;
  if (W <= 0.0) {
    const NegativityResult neg = negativity(kernel, 0.0);
    negativity_table.push_back({{"W", 0.0}, {"I", neg.I}});
    // the paper's convention for Shor-like plots: negative stems x10
    const bool scale_neg = kernel.min_value() < 0.0;
    write_text_file(g.out + "/" + stem + "_stem_W0.svg",
                    plot_stem3(kernel, title + " (W->0)", scale_neg ? 10.0 : 1.0));
    return;
  }
  const XiField field = coarse_grain(kernel, W);
  const NegativityResult neg = negativity(kernel, W);
  negativity_table.push_back(
      {{"W", W}, {"I", neg.I}, {"converged", neg.converged}, {"min", field.min_value}});
  const std::string tag = wtag(W);
  write_field_csv(field, g.out + "/" + stem + "_field_W" + tag + ".csv");
  write_field_sidecar_json(field, neg, g.out + "/" + stem + "_field_W" + tag + ".json");
  write_text_file(g.out + "/" + stem + "_heat_W" + tag + ".svg",
                  plot_heatmap(field, title + " (W=" + wtag(W) + ")"));
}

int cmd_analyze(const GlobalOpts& g, AnalyzeOpts& a) {
  using namespace mvis;
  a.sc.seed = g.seed;
  a.sc.threads = g.threads;
  fs::create_directories(g.out);
  ScenarioRun run = build_scenario(a.sc, g.out + "/cache");
  const int n = run.state.n_qubits();

  const Vcm vcm = compute_vcm(run.state, g.threads);
  const VcmSpectrum spec = spectrum(vcm);
  const SetExtraction extraction = extract_S(spec, a.sc.gamma, scenario_dictionary(run));

  std::optional<PEstimate> pfit;
  if (a.p_sizes != "none") {
    std::optional<std::vector<int>> sizes;
    if (a.p_sizes == "auto") sizes = default_p_sizes(a.sc.scenario);
    else sizes = parse_sizes(a.p_sizes);
    if (sizes)
      pfit = estimate_p(scenario_family(a.sc.scenario, g.seed, a.family_lattice, g.threads),
                        *sizes, 0.25, g.threads);
  }

  const std::string stem = a.sc.scenario + std::to_string(n);
  write_vcm_report_json(spec, pfit, extraction, g.out + "/" + stem + "_vcm.json");

  auto [opa, opb] = resolve_ops(a.ops, run, &extraction);
  const SpectralDecomposition da = decompose(opa), db = decompose(opb);
  const DiscreteKernel kernel = kernel2(run.state, da, db, g.threads);
  write_kernel_csv(kernel, n, g.out + "/" + stem + "_kernel.csv");

  json neg_table = json::array();
  for (double W : a.W) emit_field_products(kernel, W, stem, run.title, g, neg_table);

  json summary;
  summary["scenario"] = a.sc.scenario;
  summary["title"] = run.title;
  summary["n_qubits"] = n;
  summary["cache_hit"] = run.cache_hit;
  if (run.energy) summary["energy"] = *run.energy;
  if (run.shor)
    summary["shor"] = {{"I", run.shor->I}, {"x", run.shor->x}, {"N1", run.shor->N1},
                       {"N2", run.shor->N2}, {"r", run.shor->r}};
  if (run.grover) {
    summary["grover"] = {{"k", run.grover->k}, {"R", run.grover->R},
                         {"theta", run.grover->theta}, {"margin_ok", run.grover->margin_ok}};
    if (!run.grover->margin_ok)
      std::cerr << "warning: k=" << run.grover->k
                << " violates the (4k+2)/sqrt(2^N) margin with delta=0.1\n";
  }
  summary["ops"] = {kernel.labels[0], kernel.labels[1]};
  summary["kernel_sum"] = kernel.sum();
  summary["e_top"] = std::vector<double>(
      spec.eigenvalues.begin(),
      spec.eigenvalues.begin() + std::min<std::size_t>(6, spec.eigenvalues.size()));
  summary["p2_candidate"] = extraction.p2_candidate;
  json slist = json::array();
  for (const auto& m : extraction.members)
    slist.push_back({{"label", m.op.label}, {"eigenvalue", m.eigenvalue},
                     {"variance", m.variance}});
  summary["S"] = slist;
  if (pfit)
    summary["p_estimate"] = {{"p", pfit->p}, {"p_raw", pfit->p_raw},
                             {"stderr", pfit->slope_stderr},
                             {"classified_p2", pfit->classified_p2}};
  summary["negativity"] = neg_table;
  std::ofstream sf(g.out + "/" + stem + "_summary.json");
  sf << summary.dump(2) << "\n";

  std::cout << run.title << "\n"
            << "  e1=" << spec.eigenvalues[0] << " e2=" << spec.eigenvalues[1]
            << " e3=" << spec.eigenvalues[2] << "\n"
            << "  |S|=" << extraction.members.size();
  for (const auto& m : extraction.members) std::cout << " " << m.op.label;
  std::cout << "\n  outputs in " << g.out << "/ (" << stem << "_*)\n";
  return 0;
}

struct ScanOpts {
  mvis::ScenarioConfig sc;
  std::string ops = "auto";
  std::string W_list;            // "0.5,1,2" or "lo:hi:step"
  std::string w_rule;            // "N/6" etc. -> N scan
  std::string sizes = "8,10,12,14";
  std::string family_lattice = "rect";
};

std::vector<double> parse_w_list(const std::string& text) {
  std::vector<double> ws;
  if (text.find(':') != std::string::npos) {
    const auto p1 = text.find(':'), p2 = text.rfind(':');
    if (p2 == p1) throw mvis::ConfigError("W range wants lo:hi:step");
    const double lo = std::stod(text.substr(0, p1));
    const double hi = std::stod(text.substr(p1 + 1, p2 - p1 - 1));
    const double step = std::stod(text.substr(p2 + 1));
    if (step <= 0 || hi < lo) throw mvis::ConfigError("bad W range");
    for (double w = lo; w <= hi + 1e-12; w += step) ws.push_back(w);
    return ws;
  }
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ','))
    if (!cell.empty()) ws.push_back(std::stod(cell));
  return ws;
}

int cmd_scan(const GlobalOpts& g, ScanOpts& s) {
  using namespace mvis;
  s.sc.seed = g.seed;
  s.sc.threads = g.threads;
  fs::create_directories(g.out);

  if (!s.w_rule.empty()) {  // negativity vs N under a W rule
    const WRule rule = parse_w_rule(s.w_rule);
    const std::vector<int> sizes = parse_sizes(s.sizes);
    auto family = scenario_family(s.sc.scenario, g.seed, s.family_lattice, g.threads);
    auto op_sel = [&](int n) {
      ScenarioConfig c = s.sc;
      c.size = n;
      ScenarioRun r;
      r.cfg = c;
      r.state = StateVector(n, 0);  // only sizes matter for the named ops
      r.stagger_signs.resize(n);
      for (int l = 1; l <= n; ++l) r.stagger_signs[l - 1] = (l % 2 == 0) ? 1 : -1;
      return resolve_ops(s.ops, r, nullptr);
    };
    const auto rows = w_scaling_scan(family, op_sel, rule, sizes, g.threads);
    const std::string stem = g.out + "/" + s.sc.scenario + "_scanN_" + wtag(rule.c) +
                             (rule.kind == WRuleKind::SqrtN ? "sqrt" : "lin");
    write_scan_csv(rows, rule.name(), stem + ".csv");
    CurveSeries ser;
    ser.name = rule.name();
    for (const auto& r : rows) {
      ser.x.push_back(r.n);
      ser.y.push_back(r.I);
    }
    write_text_file(stem + ".svg",
                    plot_curve({ser}, "negativity vs N, " + s.sc.scenario + ", W=" +
                                          rule.name(),
                               "N", "I"));
    std::cout << "scan written to " << stem << ".csv\n";
    return 0;
  }

  // negativity vs W at fixed size
  const std::vector<double> ws = parse_w_list(s.W_list);
  if (ws.empty()) throw ConfigError("scan needs a non-empty --W list or --w-rule");
  ScenarioRun run = build_scenario(s.sc, g.out + "/cache");
  auto [opa, opb] = resolve_ops(s.ops, run, nullptr);
  const SpectralDecomposition da = decompose(opa), db = decompose(opb);
  const DiscreteKernel kernel = kernel2(run.state, da, db, g.threads);
  std::vector<ScanRow> rows;
  for (double w : ws) rows.push_back({run.state.n_qubits(), w, negativity(kernel, w).I});
  const std::string stem = g.out + "/" + s.sc.scenario +
                           std::to_string(run.state.n_qubits()) + "_scanW";
  write_scan_csv(rows, "W-list", stem + ".csv");
  CurveSeries ser;
  ser.name = "I(W)";
  for (const auto& r : rows) {
    ser.x.push_back(r.W);
    ser.y.push_back(r.I);
  }
  write_text_file(stem + ".svg", plot_curve({ser}, "negativity vs W, " + run.title, "W", "I"));
  std::cout << "scan written to " << stem << ".csv\n";
  return 0;
}

int cmd_state(const GlobalOpts& g, mvis::ScenarioConfig& sc, const std::string& dump_path) {
  using namespace mvis;
  sc.seed = g.seed;
  sc.threads = g.threads;
  fs::create_directories(g.out);
  ScenarioRun run = build_scenario(sc, g.out + "/cache");
  const std::string path = dump_path.empty()
                               ? g.out + "/" + sc.scenario + std::to_string(run.state.n_qubits()) +
                                     ".mvis"
                               : dump_path;
  dump_state(run.state, path);
  json j;
  j["title"] = run.title;
  j["n_qubits"] = run.state.n_qubits();
  j["file"] = path;
  if (run.energy) j["energy"] = *run.energy;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_vcm(const GlobalOpts& g, mvis::ScenarioConfig& sc) {
  using namespace mvis;
  sc.seed = g.seed;
  sc.threads = g.threads;
  fs::create_directories(g.out);
  ScenarioRun run = build_scenario(sc, g.out + "/cache");
  const Vcm vcm = compute_vcm(run.state, g.threads);
  const VcmSpectrum spec = spectrum(vcm);
  const SetExtraction extraction = extract_S(spec, sc.gamma, scenario_dictionary(run));
  const std::string path =
      g.out + "/" + sc.scenario + std::to_string(run.state.n_qubits()) + "_vcm.json";
  write_vcm_report_json(spec, std::nullopt, extraction, path);
  std::cout << "e1=" << spec.eigenvalues[0] << " |S|=" << extraction.members.size()
            << " report=" << path << "\n";
  return 0;
}

struct XiOpts {
  mvis::ScenarioConfig sc;
  std::string ops;
  std::vector<double> W = {0.0};
};

int cmd_xi(const GlobalOpts& g, XiOpts& x) {
  using namespace mvis;
  x.sc.seed = g.seed;
  x.sc.threads = g.threads;
  fs::create_directories(g.out);
  ScenarioRun run = build_scenario(x.sc, g.out + "/cache");
  auto [opa, opb] = resolve_ops(x.ops.empty() ? "auto" : x.ops, run, nullptr);
  const SpectralDecomposition da = decompose(opa), db = decompose(opb);
  const DiscreteKernel kernel = kernel2(run.state, da, db, g.threads);
  const std::string stem = x.sc.scenario + std::to_string(run.state.n_qubits());
  write_kernel_csv(kernel, run.state.n_qubits(), g.out + "/" + stem + "_kernel.csv");
  json neg_table = json::array();
  for (double W : x.W) emit_field_products(kernel, W, stem, run.title, g, neg_table);
  std::cout << "kernel sum=" << kernel.sum() << " outputs in " << g.out << "/\n";
  return 0;
}

// --config FILE: JSON object whose keys mirror the long flags; explicit
// command-line values win.
void apply_config_file(CLI::App& app, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw mvis::ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw mvis::ConfigError("config file is not valid JSON: " + std::string(e.what()));
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    for (auto* sub : app.get_subcommands({})) {
      CLI::Option* opt = sub->get_option_no_throw("--" + it.key());
      if (opt && opt->count() == 0) {
        const std::string v =
            it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
        opt->add_result(v);
      }
    }
    CLI::Option* opt = app.get_option_no_throw("--" + it.key());
    if (opt && opt->count() == 0) {
      const std::string v =
          it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
      opt->add_result(v);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"macroscopic-superposition visualization toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--out", g.out, "output directory");
  app.add_option("--threads", g.threads, "worker threads for kernels and the VCM");
  app.add_option("--seed", g.seed, "seed for the Lanczos start vector");
  app.add_option("--format", g.format, "csv|json (data files are always both)");
  app.add_option("--config", g.config_file, "JSON config mirroring the flags");

  auto add_scenario_opts = [](CLI::App* cmd, mvis::ScenarioConfig& sc) {
    cmd->fallthrough();  // global flags may follow the subcommand
    cmd->add_option("--scenario", sc.scenario,
                    "xy|heisenberg|shor|grover|cat|separable|custom-file")
        ->required();
    cmd->add_option("--size", sc.size, "qubit count (family scenarios)");
    cmd->add_option("--lattice", sc.lattice, "chain:N:bc or rect:RxC:bc or JSON file");
    cmd->add_option("--I", sc.shor_I, "Shor: integer to factor");
    cmd->add_option("--x", sc.shor_x, "Shor: base coprime to I");
    int kbuf = -1;
    cmd->add_option("--k", kbuf, "Grover iteration override")
        ->each([&sc](const std::string& s) { sc.grover_k = std::stoi(s); });
    cmd->add_option("--gamma", sc.gamma, "e_i >= gamma*N selection threshold");
    cmd->add_option("--state-file", sc.state_file, "custom-file scenario input");
  };

  AnalyzeOpts a;
  CLI::App* analyze = app.add_subcommand("analyze", "full pipeline with plots");
  add_scenario_opts(analyze, a.sc);
  analyze->add_option("--ops", a.ops, "auto | S | NameA,NameB");
  analyze->add_option("--W", a.W, "coarse-graining widths (0 = delta plot)")->delimiter(',');
  analyze->add_option("--p-sizes", a.p_sizes, "sizes for the p fit, 'auto' or 'none'");
  analyze->add_option("--family-lattice", a.family_lattice, "rect|chain for the p fit");

  ScanOpts s;
  CLI::App* scan = app.add_subcommand("scan", "negativity scans");
  add_scenario_opts(scan, s.sc);
  scan->add_option("--ops", s.ops, "auto | NameA,NameB");
  scan->add_option("--W", s.W_list, "W list 'a,b,c' or range 'lo:hi:step'");
  scan->add_option("--w-rule", s.w_rule, "N/6, N/8, 0.25N, sqrtN, sqrt0.5N -> scan over N");
  scan->add_option("--sizes", s.sizes, "sizes for --w-rule scans");
  scan->add_option("--family-lattice", s.family_lattice, "rect|chain family geometry");

  mvis::ScenarioConfig state_sc;
  std::string dump_path;
  CLI::App* state = app.add_subcommand("state", "build and dump a state");
  add_scenario_opts(state, state_sc);
  state->add_option("--dump", dump_path, "output .mvis path");

  mvis::ScenarioConfig vcm_sc;
  CLI::App* vcm = app.add_subcommand("vcm", "VCM spectrum and S extraction");
  add_scenario_opts(vcm, vcm_sc);

  XiOpts x;
  CLI::App* xi = app.add_subcommand("xi", "kernels and fields for given operators");
  add_scenario_opts(xi, x.sc);
  xi->add_option("--ops", x.ops, "NameA,NameB (default: scenario pair)");
  xi->add_option("--W", x.W, "coarse-graining widths (0 = delta)")->delimiter(',');

  try {
    app.parse(argc, argv);
    if (!g.config_file.empty()) apply_config_file(app, g.config_file);
    if (analyze->parsed()) return cmd_analyze(g, a);
    if (scan->parsed()) return cmd_scan(g, s);
    if (state->parsed()) return cmd_state(g, state_sc, dump_path);
    if (vcm->parsed()) return cmd_vcm(g, vcm_sc);
    if (xi->parsed()) return cmd_xi(g, x);
    return 2;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    json err = {{"error", {{"type", "config"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 2;
  } catch (const mvis::ConfigError& e) {
    json err = {{"error", {{"type", "config"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    json err = {{"error", {{"type", "numerical"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 3;
  }
}
