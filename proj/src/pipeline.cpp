#include "mvis/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mvis {

namespace {

std::vector<int> default_signs(int n) {
  std::vector<int> s(n);
  for (int l = 1; l <= n; ++l) s[l - 1] = (l % 2 == 0) ? 1 : -1;  // (-1)^l
  return s;
}

LatticeGraph build_lattice(const std::string& spec, bool need_staggering) {
  try {
    return lattice_from_string(spec, true);
  } catch (const ConfigError&) {
    if (need_staggering) throw;
    // frustrated staggering is irrelevant for this scenario; drop the signs
    return lattice_from_string(spec, false);
  }
}

std::string canonical_key(const ScenarioConfig& c, const std::string& lattice) {
  std::ostringstream os;
  os << "scenario=" << c.scenario << ";size=" << c.size << ";lattice=" << lattice
     << ";I=" << c.shor_I << ";x=" << c.shor_x
     << ";k=" << (c.grover_k ? std::to_string(*c.grover_k) : "auto") << ";seed=" << c.seed;
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(os.str())));
  return buf;
}

}  // namespace

std::string default_lattice_for(const std::string& scenario, int size,
                                const std::string& kind) {
  if (scenario != "xy" && scenario != "heisenberg")
    throw ConfigError("scenario '" + scenario + "' has no lattice");
  if (kind == "chain") return "chain:" + std::to_string(size) + ":obc";
  if (kind != "rect") throw ConfigError("lattice kind must be 'rect' or 'chain'");
  if (size % 2 != 0)
    throw ConfigError("default 2-leg rectangle needs an even size, got " +
                      std::to_string(size));
  return "rect:2x" + std::to_string(size / 2) + ":obc";
}

ScenarioRun build_scenario(const ScenarioConfig& cfg, const std::string& cache_dir) {
  ScenarioRun run;
  run.cfg = cfg;
  const std::string& sc = cfg.scenario;

  std::string lattice_spec;
  if (sc == "xy" || sc == "heisenberg")
    lattice_spec = cfg.lattice.empty() ? default_lattice_for(sc, cfg.size) : cfg.lattice;
  run.cache_key = canonical_key(cfg, lattice_spec);

  const std::string cache_file =
      cache_dir.empty() ? "" : cache_dir + "/" + run.cache_key + ".mvis";
  const std::string meta_file =
      cache_dir.empty() ? "" : cache_dir + "/" + run.cache_key + ".json";

  auto try_cache = [&]() -> bool {
    if (cache_file.empty() || !std::filesystem::exists(cache_file)) return false;
    run.state = load_state(cache_file);
    run.cache_hit = true;
    if (std::filesystem::exists(meta_file)) {
      std::ifstream mf(meta_file);
      nlohmann::json j;
      mf >> j;
      if (j.contains("energy")) run.energy = j["energy"].get<double>();
    }
    return true;
  };
  auto save_cache = [&]() {
    if (cache_file.empty()) return;
    std::filesystem::create_directories(cache_dir);
    dump_state(run.state, cache_file);
    nlohmann::json j;
    j["scenario"] = sc;
    j["key"] = run.cache_key;
    if (run.energy) j["energy"] = *run.energy;
    std::ofstream mf(meta_file);
    mf << j.dump(2) << "\n";
  };

  if (sc == "xy" || sc == "heisenberg") {
    run.lattice = build_lattice(lattice_spec, sc == "heisenberg");
    if (run.lattice->n_sites != cfg.size && !cfg.lattice.empty())
      throw ConfigError("lattice '" + lattice_spec + "' has " +
                        std::to_string(run.lattice->n_sites) + " sites but --size is " +
                        std::to_string(cfg.size));
    run.stagger_signs = run.lattice->staggered() ? run.lattice->sublattice_sign
                                                 : default_signs(run.lattice->n_sites);
    run.title = (sc == "xy" ? "XY ground state, " : "Heisenberg AF ground state, ") +
                lattice_spec;
    if (!try_cache()) {
      LanczosConfig lc;
      lc.seed = cfg.seed;
      const GroundStateResult gs =
          ground_state(sc == "xy" ? HamiltonianKind::XY : HamiltonianKind::Heisenberg,
                       *run.lattice, lc);
      run.state = gs.state;
      run.energy = gs.energy;
      save_cache();
    }
  } else if (sc == "shor") {
    auto [state, lay] = shor_me_state(cfg.shor_I, cfg.shor_x);
    run.state = std::move(state);
    run.shor = lay;
    run.stagger_signs = default_signs(lay.total_qubits());
    run.title = "Shor ME state, (I,x)=(" + std::to_string(lay.I) + "," +
                std::to_string(lay.x) + "), r=" + std::to_string(lay.r);
  } else if (sc == "grover") {
    auto [state, gp] = grover_state(cfg.size, cfg.grover_k);
    run.state = std::move(state);
    run.grover = gp;
    run.stagger_signs = default_signs(cfg.size);
    run.title = "Grover iterate, N=" + std::to_string(cfg.size) +
                ", k=" + std::to_string(gp.k);
  } else if (sc == "cat") {
    run.state = cat_state(cfg.size);
    run.stagger_signs = default_signs(cfg.size);
    run.title = "cat state, N=" + std::to_string(cfg.size);
  } else if (sc == "separable") {
    run.state = product_state(cfg.size, cplx(1.0, 0.0), cplx(0.0, 0.0));
    run.stagger_signs = default_signs(cfg.size);
    run.title = "separable |0...0>, N=" + std::to_string(cfg.size);
  } else if (sc == "custom-file") {
    if (cfg.state_file.empty())
      throw ConfigError("scenario custom-file needs --state-file");
    run.state = load_state(cfg.state_file);
    run.stagger_signs = default_signs(run.state.n_qubits());
    run.title = "custom state from " + cfg.state_file;
  } else {
    throw ConfigError("unknown scenario '" + sc +
                      "' (xy|heisenberg|shor|grover|cat|separable|custom-file)");
  }
  return run;
}

AdditiveOperator named_op(const std::string& name, const ScenarioRun& run) {
  const int n = run.state.n_qubits();
  if (name == "Mx") return uniform_op(Axis::X, n);
  if (name == "My") return uniform_op(Axis::Y, n);
  if (name == "Mz") return uniform_op(Axis::Z, n);
  if (name == "Mx_st") return staggered_op(Axis::X, run.stagger_signs);
  if (name == "My_st") return staggered_op(Axis::Y, run.stagger_signs);
  if (name == "Mz_st") return staggered_op(Axis::Z, run.stagger_signs);
  if (name == "Mx-z") return diag_xz_op(n);
  if (name == "Mx_reg1" || name == "My_st_reg1") {
    if (!run.shor) throw ConfigError("operator '" + name + "' needs a Shor scenario");
    return name == "Mx_reg1" ? shor_reg1_x_op(*run.shor)
                             : shor_reg1_y_staggered_op(*run.shor);
  }
  throw ConfigError("unknown operator '" + name +
                    "' (Mx My Mz Mx_st My_st Mz_st Mx-z Mx_reg1 My_st_reg1)");
}

std::pair<AdditiveOperator, AdditiveOperator> default_op_pair(const ScenarioRun& run) {
  const std::string& sc = run.cfg.scenario;
  if (sc == "xy" || sc == "cat" || sc == "separable")
    return {named_op("Mx", run), named_op("My", run)};
  if (sc == "heisenberg") return {named_op("Mx_st", run), named_op("My_st", run)};
  if (sc == "shor") return {named_op("Mx", run), named_op("My_st", run)};
  if (sc == "grover") return {named_op("Mx-z", run), named_op("My", run)};
  throw ConfigError("scenario '" + sc + "' has no default operator pair; pass --ops");
}

std::vector<Pattern> scenario_dictionary(const ScenarioRun& run) {
  return make_pattern_dictionary(run.state.n_qubits(), run.stagger_signs, run.shor);
}

std::function<StateVector(int)> scenario_family(const std::string& scenario,
                                                std::uint64_t seed,
                                                const std::string& lattice_kind,
                                                int threads) {
  (void)threads;
  if (scenario == "cat") return [](int n) { return cat_state(n); };
  if (scenario == "separable")
    return [](int n) { return product_state(n, cplx(1.0, 0.0), cplx(0.0, 0.0)); };
  if (scenario == "grover")
    return [](int n) { return grover_state(n).first; };
  if (scenario == "xy" || scenario == "heisenberg") {
    const HamiltonianKind kind =
        scenario == "xy" ? HamiltonianKind::XY : HamiltonianKind::Heisenberg;
    const bool need_st = scenario == "heisenberg";
    return [kind, need_st, seed, lattice_kind, scenario](int n) {
      const LatticeGraph g =
          build_lattice(default_lattice_for(scenario, n, lattice_kind), need_st);
      LanczosConfig lc;
      lc.seed = seed;
      return ground_state(kind, g, lc).state;
    };
  }
  throw ConfigError("scenario '" + scenario + "' has no size family (use cat, separable, "
                    "grover, xy, heisenberg)");
}

// ---------------------------------------------------------------------------
// Report files

namespace {

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_kernel_csv(const DiscreteKernel& k, int n_sites, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << "# ops=";
  for (std::size_t i = 0; i < k.labels.size(); ++i) f << (i ? "," : "") << k.labels[i];
  f << " N=" << n_sites << " sum=" << full(k.sum()) << "\n";
  if (k.m == 2) {
    for (std::size_t i = 0; i < k.axes[0].size(); ++i)
      for (std::size_t j = 0; j < k.axes[1].size(); ++j)
        f << full(k.axes[0][i]) << "," << full(k.axes[1][j]) << ","
          << full(k.at(int(i), int(j))) << "\n";
  } else {
    for (std::size_t i = 0; i < k.axes[0].size(); ++i)
      for (std::size_t j = 0; j < k.axes[1].size(); ++j)
        for (std::size_t l = 0; l < k.axes[2].size(); ++l)
          f << full(k.axes[0][i]) << "," << full(k.axes[1][j]) << "," << full(k.axes[2][l])
            << "," << full(k.at(int(i), int(j), int(l))) << "\n";
  }
}

DiscreteKernel read_kernel_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(f, line) || line.rfind("# ops=", 0) != 0)
    throw ConfigError("'" + path + "' is not a kernel CSV");
  struct Row {
    std::vector<double> a;
    double w;
  };
  std::vector<Row> rows;
  int m = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    Row r;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() < 3) throw ConfigError("bad kernel CSV row");
    r.w = vals.back();
    vals.pop_back();
    r.a = vals;
    m = static_cast<int>(vals.size());
    rows.push_back(std::move(r));
  }
  DiscreteKernel k;
  k.m = m;
  k.labels.assign(m, "?");
  k.axes.resize(m);
  for (int ax = 0; ax < m; ++ax) {
    std::vector<double> vals;
    for (const auto& r : rows) vals.push_back(r.a[ax]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    k.axes[ax] = vals;
  }
  std::size_t total = 1;
  for (int ax = 0; ax < m; ++ax) total *= k.axes[ax].size();
  k.values.assign(total, 0.0);
  for (const auto& r : rows) {
    std::size_t idx = 0;
    for (int ax = 0; ax < m; ++ax) {
      const auto& axis = k.axes[ax];
      const std::size_t pos =
          std::lower_bound(axis.begin(), axis.end(), r.a[ax]) - axis.begin();
      idx = idx * axis.size() + pos;
    }
    k.values[idx] = r.w;
  }
  return k;
}

void write_field_csv(const XiField& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "A,B,xi\n";
  for (int i = 0; i < f.ga.n; ++i)
    for (int j = 0; j < f.gb.n; ++j)
      out << full(f.ga.point(i)) << "," << full(f.gb.point(j)) << "," << full(f.at(i, j))
          << "\n";
}

void write_field_sidecar_json(const XiField& f, const NegativityResult& neg,
                              const std::string& path) {
  nlohmann::json j;
  j["W"] = f.W;
  j["ops"] = f.labels;
  j["grid"] = {{"a_min", f.ga.min}, {"a_step", f.ga.step}, {"a_n", f.ga.n},
               {"b_min", f.gb.min}, {"b_step", f.gb.step}, {"b_n", f.gb.n}};
  j["negativity"] = neg.I;
  j["negativity_converged"] = neg.converged;
  j["min_value"] = f.min_value;
  j["normalization_residual"] = f.integral - 1.0;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

void write_scan_csv(const std::vector<ScanRow>& rows, const std::string& rule_name,
                    const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << "# rule=" << rule_name << "\n";
  f << "N,W,I\n";
  for (const auto& r : rows) f << r.n << "," << full(r.W) << "," << full(r.I) << "\n";
}

void write_vcm_report_json(const VcmSpectrum& spec, const std::optional<PEstimate>& p,
                           const SetExtraction& s, const std::string& path) {
  nlohmann::json j;
  j["n_sites"] = spec.n_sites;
  j["eigenvalues"] = spec.eigenvalues;
  if (p) {
    j["p_estimate"] = {{"sizes", p->sizes},         {"e1s", p->e1s},
                       {"p", p->p},                 {"p_raw", p->p_raw},
                       {"slope_stderr", p->slope_stderr}, {"epsilon", p->epsilon},
                       {"classified_p2", p->classified_p2}};
  } else {
    j["p_estimate"] = nullptr;
  }
  j["gamma"] = s.gamma;
  j["p2_candidate"] = s.p2_candidate;
  auto& arr = j["S"] = nlohmann::json::array();
  for (const auto& m : s.members) {
    nlohmann::json e;
    e["label"] = m.op.label;
    e["hermitian"] = m.op.hermitian;
    e["variance"] = m.variance;
    e["eigenvalue"] = m.eigenvalue;
    e["block"] = m.block;
    if (!m.pattern.empty()) {
      e["pattern"] = m.pattern;
      e["pattern_overlap"] = m.pattern_overlap;
    }
    auto& coeffs = e["coeffs"] = nlohmann::json::array();
    for (const cplx& c : m.op.coeffs) coeffs.push_back({c.real(), c.imag()});
    arr.push_back(std::move(e));
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

std::vector<FieldMaximum> local_maxima(const XiField& f, double rel_threshold) {
  const int na = f.ga.n, nb = f.gb.n;
  double vmax = 0.0;
  for (double v : f.values) vmax = std::max(vmax, v);
  const double thr = rel_threshold * vmax;

  auto is_candidate = [&](int i, int j) {
    const double v = f.at(i, j);
    if (!(v > 0.0) || v < thr) return false;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        if (di == 0 && dj == 0) continue;
        const int ii = i + di, jj = j + dj;
        if (ii < 0 || ii >= na || jj < 0 || jj >= nb) continue;
        if (f.at(ii, jj) > v) return false;
      }
    return true;
  };

  // adjacent candidates are equal-valued plateaus; merge 8-connected runs
  std::vector<char> cand(std::size_t(na) * nb, 0);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) cand[std::size_t(i) * nb + j] = is_candidate(i, j);
  std::vector<char> seen(cand.size(), 0);
  std::vector<FieldMaximum> out;
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) {
      const std::size_t id = std::size_t(i) * nb + j;
      if (!cand[id] || seen[id]) continue;
      FieldMaximum best{i, j, f.at(i, j)};
      std::vector<std::pair<int, int>> stack{{i, j}};
      seen[id] = 1;
      while (!stack.empty()) {
        auto [ci, cj] = stack.back();
        stack.pop_back();
        for (int di = -1; di <= 1; ++di)
          for (int dj = -1; dj <= 1; ++dj) {
            const int ii = ci + di, jj = cj + dj;
            if (ii < 0 || ii >= na || jj < 0 || jj >= nb) continue;
            const std::size_t iid = std::size_t(ii) * nb + jj;
            if (cand[iid] && !seen[iid]) {
              seen[iid] = 1;
              stack.emplace_back(ii, jj);
            }
          }
      }
      out.push_back(best);
    }
  std::sort(out.begin(), out.end(),
            [](const FieldMaximum& a, const FieldMaximum& b) { return a.value > b.value; });
  return out;
}

}  // namespace mvis
