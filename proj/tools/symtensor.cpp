// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "symtensor/block_linalg.hpp"
#include "symtensor/counters.hpp"
#include "symtensor/dense_oracle.hpp"
#include "symtensor/models/exact_diag.hpp"
#include "symtensor/models/mera.hpp"
#include "symtensor/parallel.hpp"
#include "symtensor/serialize.hpp"
#include "symtensor/verify.hpp"

using nlohmann::json;
using namespace symtensor;

namespace {

json counters_json() {
  const auto s = counters::snapshot();
  return {{"spin_networks_evaluated", s.spin_networks_evaluated},
          {"gamma_builds", s.gamma_builds},
          {"gamma_cache_hits", s.gamma_cache_hits},
          {"gamma_disk_hits", s.gamma_disk_hits},
          {"matmul_flops", s.matmul_flops},
          {"svd_flops", s.svd_flops},
          {"coeffs_touched", s.coeffs_touched}};
}

void apply_cache_dir(const std::string& flag_value) {
  std::string dir = flag_value;
  if (dir.empty()) {
    if (const char* env = std::getenv("SYMTENSOR_CACHE_DIR")) dir = env;
  }
  if (!dir.empty()) GammaCache::global().set_disk_dir(dir);
}

void emit(const json& j, const std::string& out_file) {
  if (out_file.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream os(out_file);
    os << j.dump(2) << "\n";
  }
}

/// Schema error carrying the config path that failed.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& path, const std::string& what)
      : std::runtime_error("config error at " + path + ": " + what) {}
};

RepSpace space_from_pairs(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw SchemaError(path, "expected [[twice_j,d],...]");
  std::vector<RepSpace::Sector> secs;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    if (!e.is_array() || e.size() != 2)
      throw SchemaError(path + "/" + std::to_string(i), "expected [twice_j, d]");
    const int c = e[0].get<int>();
    const int d = e[1].get<int>();
    if (c < 0) throw SchemaError(path + "/" + std::to_string(i) + "/0",
                                 "twice_j must be non-negative");
    if (d < 1) throw SchemaError(path + "/" + std::to_string(i) + "/1",
                                 "degeneracy must be positive");
    secs.push_back({c, d});
  }
  std::sort(secs.begin(), secs.end(),
            [](const auto& a, const auto& b) { return a.charge < b.charge; });
  return RepSpace(su2_system(), secs);
}

int run_verify(const std::string& suite, const std::string& out_file) {
  std::vector<verify::SuiteReport> reports;
  if (suite == "all") {
    reports = verify::verify_all();
  } else if (suite == "kernels") {
    reports = {verify::verify_kernels()};
  } else if (suite == "tensors") {
    reports = {verify::verify_tensors()};
  } else if (suite == "linalg") {
    reports = {verify::verify_linalg()};
  } else if (suite == "models") {
    reports = {verify::verify_models()};
  } else {
    std::cerr << "unknown suite: " << suite << "\n";
    return 2;
  }
  bool all_pass = true;
  json out;
  out["format_version"] = kFormatVersion;
  out["suites"] = json::array();
  for (const auto& rep : reports) {
    json suite_json;
    suite_json["suite"] = rep.suite;
    suite_json["pass"] = rep.pass();
    suite_json["properties"] = json::array();
    for (const auto& p : rep.properties) {
      suite_json["properties"].push_back({{"name", p.name},
                                          {"instances", p.instances},
                                          {"max_residual", p.max_residual},
                                          {"limit", p.limit},
                                          {"pass", p.pass}});
      all_pass = all_pass && p.pass;
    }
    out["suites"].push_back(std::move(suite_json));
  }
  out["pass"] = all_pass;
  out["counters"] = counters_json();
  emit(out, out_file);
  return all_pass ? 0 : 1;
}

int run_bench(const std::string& op, int q, int d, int reps, bool dense_mode,
              bool sym_mode, const std::string& out_file) {
  if (!dense_mode && !sym_mode) dense_mode = sym_mode = true;
  std::ostringstream csv;
  csv << "op,mode,q,d,rep,seconds,flops,coeffs_touched\n";
  auto su2 = su2_system();
  std::vector<RepSpace::Sector> secs;
  for (int i = 0; i < q; ++i) secs.push_back({2 * i, d});  // spins 0..q-1
  RepSpace v(su2, secs);
  std::mt19937_64 rng(1);

  auto stamp = [&](const std::string& mode, int rep, double seconds,
                   std::int64_t flops, std::int64_t coeffs) {
    csv << op << ',' << mode << ',' << q << ',' << d << ',' << rep << ',' << seconds
        << ',' << flops << ',' << coeffs << "\n";
  };
  auto now = [] { return std::chrono::steady_clock::now(); };
  auto secs_since = [](auto t0, auto t1) {
    return std::chrono::duration<double>(t1 - t0).count();
  };

  if (op == "matmul" || op == "svd") {
    BlockDiagMatrix m(v, v), n(v, v);
    for (const auto& s : v.sectors()) {
      m.set_block(s.charge, Eigen::MatrixXd::Random(d, d));
      n.set_block(s.charge, Eigen::MatrixXd::Random(d, d));
    }
    const Eigen::MatrixXd md = m.dense(), nd = n.dense();
    for (int rep = 0; rep < reps; ++rep) {
      if (sym_mode) {
        counters::reset();
        const auto t0 = now();
        if (op == "matmul")
          matmul(m, n);
        else
          svd(m);
        const auto t1 = now();
        const auto snap = counters::snapshot();
        stamp("sym", rep, secs_since(t0, t1),
              op == "matmul" ? snap.matmul_flops : snap.svd_flops, snap.coeffs_touched);
      }
      if (dense_mode) {
        const auto t0 = now();
        std::int64_t flops = 0;
        if (op == "matmul") {
          volatile double sink = (md * nd).sum();
          (void)sink;
          flops = static_cast<std::int64_t>(md.rows()) * md.cols() * nd.cols();
        } else {
          Eigen::JacobiSVD<Eigen::MatrixXd> dec(md);
          volatile double sink = dec.singularValues().sum();
          (void)sink;
          flops = static_cast<std::int64_t>(md.rows()) * md.cols() *
                  std::min(md.rows(), md.cols());
        }
        const auto t1 = now();
        stamp("dense", rep, secs_since(t0, t1), flops,
              static_cast<std::int64_t>(md.size()));
      }
    }
  } else if (op == "permute" || op == "fuse") {
    const std::vector<RepSpace> spaces(4, v);
    const std::vector<Direction> dirs(4, Direction::Out);
    SymTensor t = random_invariant(spaces, dirs, left_comb(4), 0, rng);
    const std::vector<int> perm{2, 0, 3, 1};
    for (int rep = 0; rep < reps; ++rep) {
      if (sym_mode) {
        counters::reset();
        const auto t0 = now();
        if (op == "permute")
          permute(t, perm, left_comb(4));
        else
          fuse(t, {{0, 2}, {2, 1}, {3, 1}}, left_comb(3));
        const auto t1 = now();
        const auto snap = counters::snapshot();
        stamp("sym", rep, secs_since(t0, t1), snap.spin_networks_evaluated,
              snap.coeffs_touched);
      }
      if (dense_mode) {
        DenseTensorD dt({v.total_dim(), v.total_dim(), v.total_dim(), v.total_dim()});
        for (auto& x : dt.data()) x = 0.5;
        const auto t0 = now();
        DenseTensorD moved =
            op == "permute" ? dense_permute(dt, perm) : dense_fuse_plain(dt, 0);
        volatile double sink = moved[0];
        (void)sink;
        const auto t1 = now();
        stamp("dense", rep, secs_since(t0, t1), 0, moved.size());
      }
    }
  } else {
    std::cerr << "unknown bench op: " << op << "\n";
    return 2;
  }
  if (out_file.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream os(out_file);
    os << csv.str();
  }
  return 0;
}

int run_solve(const std::string& what, const std::string& config_file,
              const std::string& out_file) {
  json cfg;
  {
    std::ifstream is(config_file);
    if (!is) {
      std::cerr << "cannot open config file: " << config_file << "\n";
      return 2;
    }
    try {
      is >> cfg;
    } catch (const std::exception& ex) {
      std::cerr << "config parse error: " << ex.what() << "\n";
      return 2;
    }
  }
  try {
    if (what == "ed") {
      models::EdOptions opts;
      if (!cfg.contains("L")) throw SchemaError("/L", "missing");
      opts.num_sites = cfg.at("L").get<int>();
      if (opts.num_sites < 2) throw SchemaError("/L", "need at least two sites");
      opts.periodic = cfg.value("periodic", true);
      const std::string site = cfg.value("site", std::string("spin-half"));
      if (site == "spin-half")
        opts.site = models::spin_half_site();
      else if (site == "blocked")
        opts.site = models::blocked_site();
      else
        throw SchemaError("/site", "expected \"spin-half\" or \"blocked\"");
      if (cfg.contains("sectors") && cfg.at("sectors").is_array()) {
        std::vector<Charge> sectors;
        for (std::size_t i = 0; i < cfg.at("sectors").size(); ++i) {
          const int c = cfg.at("sectors")[i].get<int>();
          if (c < 0)
            throw SchemaError("/sectors/" + std::to_string(i), "twice_J must be >= 0");
          sectors.push_back(c);
        }
        opts.sectors = sectors;
      }
      const auto result = models::exact_diag_blocked(opts);
      json out;
      out["format_version"] = kFormatVersion;
      out["solver"] = "ed";
      out["L"] = opts.num_sites;
      out["periodic"] = opts.periodic;
      out["site"] = site;
      out["sectors"] = json::array();
      for (const auto& s : result.sectors) {
        json e = json::array();
        for (int i = 0; i < s.energies.size(); ++i) e.push_back(s.energies[i]);
        out["sectors"].push_back({{"twice_j", s.sector}, {"energies", e}});
      }
      out["ground_energy"] = result.ground_energy();
      out["ground_sector_twice_j"] = result.ground_sector();
      out["counters"] = counters_json();
      emit(out, out_file);
      return 0;
    }
    if (what == "mera") {
      models::MeraConfig mc;
      mc.layers = cfg.value("Q", 1);
      if (mc.layers < 1) throw SchemaError("/Q", "need at least one layer");
      if (!cfg.contains("bonds")) throw SchemaError("/bonds", "missing");
      const auto& bonds = cfg.at("bonds");
      if (!bonds.is_array() || bonds.empty()) throw SchemaError("/bonds", "expected array");
      for (std::size_t i = 0; i < bonds.size(); ++i)
        mc.bonds.push_back(space_from_pairs(bonds[i], "/bonds/" + std::to_string(i)));
      if (static_cast<int>(mc.bonds.size()) == 1 && mc.layers > 1)
        mc.bonds.resize(static_cast<std::size_t>(mc.layers), mc.bonds.front());
      if (static_cast<int>(mc.bonds.size()) != mc.layers)
        throw SchemaError("/bonds", "expected one bond assignment per layer (or one for all)");
      mc.top_charge = cfg.value("J", 0);
      if (mc.top_charge < 0) throw SchemaError("/J", "twice_J must be >= 0");
      mc.chi_top = cfg.value("chi_top", 1);
      if (mc.chi_top < 1) throw SchemaError("/chi_top", "must be positive");
      mc.sweeps = cfg.value("sweeps", 100);
      if (mc.sweeps < 0) throw SchemaError("/sweeps", "must be non-negative");
      mc.seed = cfg.value("seed", 1ull);
      if (cfg.contains("cache_dir")) {
        GammaCache::global().set_disk_dir(cfg.at("cache_dir").get<std::string>());
      }
      auto state = models::mera_build(mc);
      const SymTensor gate = models::heisenberg_gate(models::blocked_site());
      counters::reset();
      const auto trace = models::mera_optimize(state, gate, mc.sweeps);
      json out;
      out["format_version"] = kFormatVersion;
      out["solver"] = "mera";
      out["Q"] = mc.layers;
      out["J_twice"] = mc.top_charge;
      out["chi_top"] = state.cfg.chi_top;
      out["seed"] = mc.seed;
      out["bottom_sites"] = state.bottom_sites();
      out["spin_count"] = 2 * state.bottom_sites();
      json energies = json::array();
      for (double e : trace.energies) energies.push_back(e);
      out["energies"] = energies;
      out["final_energy"] = trace.energies.back();
      out["rejected_updates"] = trace.rejected_updates;
      double iso = 0, inv = 0;
      for (int q = 0; q < mc.layers; ++q) {
        iso = std::max({iso, models::isometry_residual(state.u[static_cast<std::size_t>(q)], 2),
                        models::isometry_residual(state.w[static_cast<std::size_t>(q)], 3)});
        inv = std::max({inv, invariance_residual(state.u[static_cast<std::size_t>(q)]),
                        invariance_residual(state.w[static_cast<std::size_t>(q)])});
      }
      iso = std::max(iso, models::isometry_residual(state.top, 2));
      inv = std::max(inv, invariance_residual(state.top));
      out["isometry_residual_max"] = iso;
      out["invariance_residual_max"] = inv;
      out["warnings"] = state.warnings;
      out["counters"] = counters_json();
      emit(out, out_file);
      return 0;
    }
    std::cerr << "unknown solver: " << what << "\n";
    return 2;
  } catch (const SchemaError& ex) {
    std::cerr << ex.what() << "\n";
    return 2;
  } catch (const json::exception& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SU(2)-aware tensor-network engine"};
  app.require_subcommand(1);

  std::string cache_dir;
  int threads = 1;
  app.add_option("--gamma-cache", cache_dir, "directory for the precompute cache");
  app.add_option("--threads", threads, "cap on per-charge worker threads");

  auto* verify_cmd = app.add_subcommand("verify", "run the invariant suites");
  std::string suite = "all";
  std::string verify_out;
  verify_cmd->add_option("--suite", suite, "kernels|tensors|linalg|models|all");
  verify_cmd->add_option("--out", verify_out, "write the JSON report to a file");

  auto* bench_cmd = app.add_subcommand("bench", "deterministic cost benchmarks (CSV)");
  std::string bench_op = "matmul";
  int bench_q = 3, bench_d = 8, bench_reps = 1;
  bool bench_dense = false, bench_sym = false;
  std::string bench_out;
  bench_cmd->add_option("--op", bench_op, "matmul|svd|permute|fuse")->required();
  bench_cmd->add_option("--charges", bench_q, "number of charges q");
  bench_cmd->add_option("--deg", bench_d, "degeneracy d per charge");
  bench_cmd->add_option("--reps", bench_reps, "repetitions");
  bench_cmd->add_flag("--dense", bench_dense, "dense mode rows");
  bench_cmd->add_flag("--sym", bench_sym, "symmetric mode rows");
  bench_cmd->add_option("--out", bench_out, "write CSV to a file");

  auto* solve_cmd = app.add_subcommand("solve", "run a solver from a JSON config");
  std::string solver, config_file, solve_out;
  solve_cmd->add_option("what", solver, "ed|mera")->required();
  solve_cmd->add_option("--config", config_file, "JSON config file")->required();
  solve_cmd->add_option("--out", solve_out, "write the JSON results to a file");

  CLI11_PARSE(app, argc, argv);

  apply_cache_dir(cache_dir);
  set_max_workers(threads);

  try {
    if (*verify_cmd) return run_verify(suite, verify_out);
    if (*bench_cmd)
      return run_bench(bench_op, bench_q, bench_d, bench_reps, bench_dense, bench_sym,
                       bench_out);
    if (*solve_cmd) return run_solve(solver, config_file, solve_out);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 2;
}
