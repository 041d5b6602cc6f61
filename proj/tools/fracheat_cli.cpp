// Command-line front end: index sets, fBm samples and lifts, solves,
// expansions, remainder tables, Malliavin scans, energy minimization, density
// sweeps and full experiment reports.

#include "fracheat/config.hpp"
#include "fracheat/expansion.hpp"
#include "fracheat/fbm.hpp"
#include "fracheat/io.hpp"
#include "fracheat/kernel_lab.hpp"
#include "fracheat/malliavin.hpp"
#include "fracheat/rde.hpp"
#include "fracheat/variational.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace fracheat;

namespace {

// Flags that mirror configuration keys; a flag given on the command line
// overrides the same key from --config.
struct ConfigFlags {
  std::string path;
  std::vector<std::string> overrides;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app, const std::vector<std::pair<std::string, std::string>>& flags) {
    app->add_option("-c,--config", path, "key = value configuration file");
    app->add_option("--set", overrides, "override a config key (key=value), repeatable");
    for (const auto& [flag, key] : flags) app->add_option("--" + flag, values[key], "config key '" + key + "'");
  }

  KeyValueConfig load() const {
    KeyValueConfig kv = path.empty() ? KeyValueConfig{} : KeyValueConfig::load(path);
    for (const auto& [key, value] : values)
      if (!value.empty()) kv.set(key, value);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
      kv.set(o.substr(0, eq), o.substr(eq + 1));
    }
    return kv;
  }
};

const std::vector<std::pair<std::string, std::string>> kModelFlags = {
    {"fields", "fields"}, {"a", "a"},           {"a-prime", "a_prime"},     {"hurst", "hurst"},
    {"depth", "depth"},   {"seed", "seed"},     {"n-samples", "n_samples"}, {"t-grid", "t_grid"},
    {"eps-grid", "eps_grid"}, {"output", "output"}, {"bandwidth-c", "bandwidth_c"}};

struct Model {
  VectorFieldSet fields{ConstantFields{Mat::Identity(1, 1), Vec::Zero(1)}};
  Vec a;
  Hurst hurst{Rational(1, 2)};
  double p = 0.0;
};

Model model_from(const KeyValueConfig& kv) {
  Model m;
  m.a = kv.vector("a");
  m.fields = fields_from_config(kv, static_cast<int>(m.a.size()));
  if (m.a.size() != m.fields.n()) throw ConfigError("config field 'a': expected dimension " + std::to_string(m.fields.n()));
  m.hurst = Hurst::parse(kv.get("hurst"));
  m.p = kv.number_or("p", default_p(m.hurst.value()));
  return m;
}

std::vector<GeometricRoughPath2> load_paths(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  auto paths = read_rough_paths_jsonl(in);
  if (paths.empty()) throw Error("no rough paths in '" + path + "'");
  return paths;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    write_text_file(out, text);
}

CameronMartinPath load_gamma(const std::string& path, const Hurst& hurst, int dim) {
  if (path.empty()) return CameronMartinPath::zero(hurst.exact(), dim, 1);
  std::istringstream in(read_text_file(path));
  std::string line;
  std::getline(in, line);
  const MinimizerRecord rec = minimizer_from_json(Json::parse(line));
  if (!(rec.hurst == hurst.exact())) throw ConfigError("minimizer record has H = " + rec.hurst.str());
  return rec.gamma();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fracheat: short-time heat-kernel experiments for fBm-driven rough differential equations"};
  app.require_subcommand(1);

  // index-set
  auto* idx = app.add_subcommand("index-set", "enumerate an index set L1 | L2 | L2p | L3 | L3p | L4");
  std::string family = "L1", hurst_text = "1/2";
  double cutoff = 6.0;
  idx->add_option("--family", family, "index family")->capture_default_str();
  idx->add_option("--hurst", hurst_text, "Hurst parameter as a rational")->capture_default_str();
  idx->add_option("--cutoff", cutoff, "upper cutoff")->capture_default_str();

  // sample
  auto* smp = app.add_subcommand("sample", "sample fBm on a dyadic grid and write the lifted rough paths (JSONL)");
  int dim = 1, depth = 8, count = 10;
  std::uint64_t seed = 1;
  std::string out;
  smp->add_option("--hurst", hurst_text)->capture_default_str();
  smp->add_option("--dim", dim)->capture_default_str();
  smp->add_option("--depth", depth)->capture_default_str();
  smp->add_option("--seed", seed)->capture_default_str();
  smp->add_option("--count", count)->capture_default_str();
  smp->add_option("-o,--out", out, "output JSONL (manifest written next to it)")->required();

  // lift
  auto* lift = app.add_subcommand("lift", "lift a piecewise-linear path from CSV (t, x1, ..., xd) to a rough path");
  std::string in_path;
  lift->add_option("-i,--in", in_path, "input CSV with a header line")->required();
  lift->add_option("-o,--out", out, "output JSONL ('-' for stdout)");

  // solve
  auto* solve = app.add_subcommand("solve", "solve the scaled equation along rough paths; endpoint CSV");
  ConfigFlags solve_cfg;
  solve_cfg.attach(solve, kModelFlags);
  std::string paths_path;
  double eps = 1.0;
  bool trajectory = false;
  solve->add_option("--paths", paths_path, "rough paths JSONL")->required();
  solve->add_option("--eps", eps, "noise scale in (0, 1]")->capture_default_str();
  solve->add_flag("--trajectory", trajectory, "write the whole trajectory of every path");
  solve->add_option("-o,--out", out);

  // expand
  auto* exp = app.add_subcommand("expand", "expansion terms along the first rough path; CSV (t, kappa, components)");
  ConfigFlags exp_cfg;
  exp_cfg.attach(exp, kModelFlags);
  std::string gamma_path;
  int order = 2;
  exp->add_option("--paths", paths_path)->required();
  exp->add_option("--gamma", gamma_path, "minimizer JSONL providing gamma (default gamma = 0)");
  exp->add_option("--order", order)->capture_default_str();
  exp->add_option("-o,--out", out);

  // remainders
  auto* rem = app.add_subcommand("remainders", "p-variation norms of expansion remainders; CSV and fitted orders");
  ConfigFlags rem_cfg;
  rem_cfg.attach(rem, kModelFlags);
  std::vector<double> eps_list;
  std::string manifest_path;
  rem->add_option("--paths", paths_path)->required();
  rem->add_option("--gamma", gamma_path);
  rem->add_option("--order", order)->capture_default_str();
  rem->add_option("--eps", eps_list, "noise scales")->delimiter(',')->required();
  rem->add_option("--manifest", manifest_path, "JSON manifest to append the fits to");
  rem->add_option("-o,--out", out);

  // malliavin
  auto* mal = app.add_subcommand("malliavin", "smallest eigenvalue of the Malliavin covariance over samples");
  ConfigFlags mal_cfg;
  mal_cfg.attach(mal, kModelFlags);
  std::string summary_path;
  mal->add_option("--eps", eps_list)->delimiter(',')->required();
  mal->add_option("--summary", summary_path, "summary JSON output");
  mal->add_option("-o,--out", out);

  // minimize
  auto* mini = app.add_subcommand("minimize", "minimal-energy Cameron-Martin path from a to a'; JSONL record");
  ConfigFlags mini_cfg;
  mini_cfg.attach(mini, kModelFlags);
  int nodes = 64, basis = 0, grid_depth = 10;
  mini->add_option("--nodes", nodes)->capture_default_str();
  mini->add_option("--grid-depth", grid_depth)->capture_default_str();
  mini->add_option("--hessian-basis", basis, "also report the second-order test on this many nodes");
  mini->add_option("-o,--out", out);

  // density
  auto* den = app.add_subcommand("density", "KDE density sweep over the t-grid at a and a'; CSV");
  ConfigFlags den_cfg;
  den_cfg.attach(den, kModelFlags);
  den->add_option("-o,--out", out);

  // report
  auto* rep = app.add_subcommand("report", "full experiment: minimizer, densities, fits, localization");
  ConfigFlags rep_cfg;
  rep_cfg.attach(rep, kModelFlags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (idx->parsed()) {
      const IndexSet s = index_set(parse_index_family(family), Hurst::parse(hurst_text), cutoff);
      for (const auto& e : s.elements) std::cout << e.str() << '\t' << format_double(e.value()) << '\n';
    } else if (smp->parsed()) {
      const Rational h = Hurst::parse(hurst_text).exact();
      const FbmSampler sampler({h, dim, depth, seed, SamplerKind::Auto});
      std::ofstream os(out);
      if (!os) throw Error("cannot write '" + out + "'");
      for (int s = 0; s < count; ++s) os << rough_path_to_json(lift_dyadic(sampler.sample(s), depth)).dump() << '\n';
      write_text_file(out + ".manifest.json", sample_manifest(h, depth, seed, count).dump(2) + "\n");
    } else if (lift->parsed()) {
      std::istringstream in(read_text_file(in_path));
      std::string line;
      std::getline(in, line);
      std::vector<double> grid;
      std::vector<std::vector<double>> cols;
      while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto row = parse_list(line);
        if (row.size() < 2) throw ConfigError("lift: each row needs t and at least one coordinate");
        grid.push_back(row[0]);
        cols.emplace_back(row.begin() + 1, row.end());
      }
      Mat values(static_cast<Eigen::Index>(cols.front().size()), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k)
        for (std::size_t i = 0; i < cols[k].size(); ++i)
          values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = cols[k].at(i);
      emit(out, rough_path_to_json(GeometricRoughPath2::from_linear_path(grid, values)).dump() + "\n");
    } else if (solve->parsed()) {
      const Model m = model_from(solve_cfg.load());
      std::ostringstream os;
      os << (trajectory ? "sample,t" : "sample");
      for (int i = 0; i < m.fields.n(); ++i) os << ",y" << i;
      os << '\n';
      const auto paths = load_paths(paths_path);
      for (std::size_t s = 0; s < paths.size(); ++s) {
        const SolutionBundle sol = solve_scaled(paths[s], eps, m.fields, m.a, m.hurst, m.p);
        const Eigen::Index first = trajectory ? 0 : sol.y.cols() - 1;
        for (Eigen::Index k = first; k < sol.y.cols(); ++k) {
          os << s;
          if (trajectory) os << ',' << format_double(sol.grid[k]);
          for (Eigen::Index i = 0; i < sol.y.rows(); ++i) os << ',' << format_double(sol.y(i, k));
          os << '\n';
        }
      }
      emit(out, os.str());
    } else if (exp->parsed()) {
      const Model m = model_from(exp_cfg.load());
      const auto x = load_paths(paths_path).front();
      const ExpansionBundle b = expand(x, load_gamma(gamma_path, m.hurst, x.dim()), m.fields, m.a, m.hurst, order, m.p);
      std::ostringstream os;
      os << "t,kappa";
      for (int i = 0; i < m.fields.n(); ++i) os << ",phi" << i;
      os << '\n';
      for (const auto& term : b.terms)
        for (Eigen::Index k = 0; k < term.path.cols(); ++k) {
          os << format_double(x.grid()[k]) << ',' << term.kappa.str();
          for (Eigen::Index i = 0; i < term.path.rows(); ++i) os << ',' << format_double(term.path(i, k));
          os << '\n';
        }
      emit(out, os.str());
    } else if (rem->parsed()) {
      const Model m = model_from(rem_cfg.load());
      const auto x = load_paths(paths_path).front();
      const CameronMartinPath gamma = load_gamma(gamma_path, m.hurst, x.dim());
      std::vector<RemainderRow> rows;
      Json manifest = manifest_path.empty() || !std::filesystem::exists(manifest_path)
                          ? Json::object()
                          : Json::parse(read_text_file(manifest_path));
      for (int k = 0; k <= order; ++k) {
        const auto r = remainder_norms(expand(x, gamma, m.fields, m.a, m.hurst, k, m.p), eps_list);
        rows.insert(rows.end(), r.begin(), r.end());
        std::vector<double> norms;
        for (const auto& row : r) norms.push_back(row.pvar_norm);
        if (eps_list.size() >= 4) {
          const OrderFit fit = fit_order(eps_list, norms);
          append_fit(manifest, k, fit);
          std::cerr << "k = " << k << ": slope " << fit.slope << " +- " << fit.slope_band << " (kappa_next "
                    << r.front().kappa_next << "), r2 " << fit.r2 << '\n';
        }
      }
      std::ostringstream os;
      write_remainders_csv(os, rows);
      emit(out, os.str());
      if (!manifest_path.empty()) write_text_file(manifest_path, manifest.dump(2) + "\n");
    } else if (mal->parsed()) {
      const KeyValueConfig kv = mal_cfg.load();
      const Model m = model_from(kv);
      ScanModel sm{m.fields, m.a, m.hurst.exact(), kv.integer_or("depth", 8), kv.has("seed") ? kv.unsigned_integer("seed") : 1};
      const ScanResult scan = nondegeneracy_scan(sm, eps_list, kv.integer_or("n_samples", 100));
      std::ostringstream os;
      write_eigen_csv(os, scan);
      emit(out, os.str());
      if (!summary_path.empty()) write_text_file(summary_path, scan_summary_json(scan).dump(2) + "\n");
    } else if (mini->parsed()) {
      const KeyValueConfig kv = mini_cfg.load();
      const Model m = model_from(kv);
      VariationalOptions opts;
      opts.grid_depth = grid_depth;
      const MinimizerResult r = minimize_energy(m.a, kv.vector("a_prime"), m.fields, m.hurst, uniform_nodes(nodes), opts);
      std::cerr << "energy " << r.energy << ", endpoint residual " << r.endpoint_residual << ", Lagrange residual "
                << r.lagrange_residual << (r.converged ? ", converged" : ", NOT converged") << ", basins "
                << r.distinct_basins << '\n';
      if (basis > 0) {
        const HessianReport h = hessian_spectrum(r, m.hurst, basis);
        std::cerr << "sup Spec(A_hat) = " << h.sup << (h.verdict ? " < 1/2" : " >= 1/2") << '\n';
      }
      emit(out, minimizer_to_json(r).dump() + "\n");
    } else if (den->parsed()) {
      const ExperimentConfig cfg = ExperimentConfig::from_kv(den_cfg.load());
      const EndpointCloud cloud = simulate_endpoints(cfg, cfg.t_grid);
      const auto on = densities_from_cloud(cloud, cfg.a, cfg.bandwidth_c);
      const bool diagonal = (cfg.a - cfg.a_prime).norm() == 0.0;
      emit(out, densities_csv(on, diagonal ? std::vector<DensityEstimate>{}
                                           : densities_from_cloud(cloud, cfg.a_prime, cfg.bandwidth_c)));
    } else if (rep->parsed()) {
      const ExperimentReport r = run_experiment(ExperimentConfig::from_kv(rep_cfg.load()));
      std::cout << r.report_text;
      for (const auto& f : r.files) std::cerr << "wrote " << f << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
