#pragma once

// Monte Carlo estimation of the transition density p(t, a, a') and short-time
// fits against the on- and off-diagonal expansions, localization diagnostics,
// and the experiment driver that persists everything.

#include "fracheat/config.hpp"
#include "fracheat/expansion.hpp"
#include "fracheat/fbm.hpp"
#include "fracheat/fields.hpp"
#include "fracheat/types.hpp"
#include "fracheat/variational.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fracheat {

/// Builds a field catalog entry from the `fields` / `fields.*` keys:
///   fields = identity   fields.dim, fields.drift (scalar)
///   fields = constant   fields.sigma (n x d), fields.drift (n)
///   fields = trig       fields.sigma, fields.amp (n x d), fields.drift, fields.drift_amp (n), fields.freq
///   fields = linear     fields.a (d matrices n x n separated by '|'), fields.b (n x n)
VectorFieldSet fields_from_config(const KeyValueConfig& kv, int default_dim);

struct ExperimentConfig {
  std::string name = "experiment";
  VectorFieldSet fields{ConstantFields{Mat::Identity(1, 1), Vec::Zero(1)}};
  Vec a, a_prime;
  Rational hurst{1, 2};
  int depth = 6;
  double p = 0.0;            // roughness exponent of the driver (defaults to 1 / (0.95 H))
  double q = 0.0;            // Cameron-Martin variation exponent (defaults to 1 / (H + 1/2))
  double alpha_prime = 0.0;  // Besov exponent (defaults to 0.9 H)
  int besov_m = 2;           // Besov integrability m; the norms use 4m
  std::vector<double> t_grid;
  int n_samples = 1000;
  double bandwidth_c = 1.06;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  int minimizer_nodes = 64;
  int minimizer_depth = 10;
  std::vector<double> eta_grid{0.5, 1.0, 2.0};
  int localization_samples = 2000;
  int localization_depth = 6;

  static ExperimentConfig from_kv(const KeyValueConfig& kv);
  static ExperimentConfig load(const std::string& path);
  Hurst hurst_value() const { return Hurst(hurst); }
};

struct DensityEstimate {
  double t = 0.0;
  Vec a_prime;
  double p_hat = 0.0;
  double std_error = 0.0;
  double bandwidth = 0.0;  // geometric mean of the per-coordinate bandwidths
  int n_samples = 0;       // accepted samples
  int rejected = 0;        // samples that left the field domain
  double p_half = 0.0;     // bandwidth x 1/2
  double p_double = 0.0;   // bandwidth x 2
};

/// Endpoints y_t for every t in the grid, computed from the same fBm samples
/// via eps = t^H; column s of y[i] is sample s at t_grid[i] (NaN if rejected).
struct EndpointCloud {
  std::vector<double> t;
  std::vector<Mat> y;
};

EndpointCloud simulate_endpoints(const ExperimentConfig& cfg, const std::vector<double>& t_grid);

/// Gaussian product-kernel estimate at `a_prime`, bandwidth factor applied on
/// top of c s n^{-1/(n+4)}; stderr from 16 batch means.
DensityEstimate kde_estimate(const Mat& y, double t, const Vec& a_prime, double c, double factor = 1.0);

DensityEstimate estimate_density(const ExperimentConfig& cfg, double t, const Vec& a_prime);
std::vector<DensityEstimate> estimate_densities(const ExperimentConfig& cfg, const Vec& a_prime);
std::vector<DensityEstimate> densities_from_cloud(const EndpointCloud& cloud, const Vec& a_prime, double c);

struct OndiagFit {
  double exponent = 0.0;         // slope of log p_hat on log t
  double exponent_stderr = 0.0;
  double target_exponent = 0.0;  // -n H
  double c0_hat = 0.0;           // mean of p_hat t^{nH} over the two smallest t
  double gap = 0.0;              // best g in p_hat t^{nH} = c0 + c1 t^g
  double target_gap = 0.0;       // nu_1 H, first positive element of Lambda_3 times H
};

OndiagFit ondiag_fit(const std::vector<DensityEstimate>& est, const Hurst& hurst, int n);

struct OffdiagFit {
  double energy_hat = 0.0;   // estimate of ||gamma_bar||^2
  double target = 0.0;       // ||gamma_bar||^2
  double agreement = 0.0;    // relative error (absolute when target = 0)
  double log_alpha0 = 0.0;   // coefficient of t^{2H}
  double next_coeff = 0.0;   // coefficient of t^{2H + lambda_1 H}
  double gap_exponent = 0.0; // lambda_1 H, first positive element of Lambda_4 times H
  double residual_slope = 0.0;
  bool degenerate = false;   // a' = a: the on-diagonal fit applies instead
  std::vector<double> residuals;
};

/// `cm_norm_squared` is ||gamma_bar||^2 = 2 * minimal energy.
OffdiagFit offdiag_fit(const std::vector<DensityEstimate>& est, const Hurst& hurst, int n, double cm_norm_squared);

struct LocalizationRow {
  double eps;
  double eta;
  double fraction;
  double std_error;
};

/// Fraction of samples with tau_{-gamma_bar}(eps w) outside U_eta, i.e. whose
/// level-1 or level-2 Besov norm reaches eta or eta^2.
std::vector<LocalizationRow> localization_fraction(const ExperimentConfig& cfg, const CameronMartinPath& gamma_bar,
                                                   const std::vector<double>& eps_grid,
                                                   const std::vector<double>& eta_grid);

struct ExperimentReport {
  MinimizerResult minimizer;
  std::vector<DensityEstimate> ondiag, offdiag;
  OndiagFit ondiag_result;
  OffdiagFit offdiag_result;
  std::vector<LocalizationRow> localization;
  std::string report_text;
  std::vector<std::string> files;
};

/// minimize_energy -> density sweep -> fits -> localization; writes
/// minimizer.jsonl, densities.csv, localization.csv, manifest.json and report.txt
/// into cfg.output_dir (created if needed).
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// densities.csv content for a sweep (shared by the CLI).
std::string densities_csv(const std::vector<DensityEstimate>& on, const std::vector<DensityEstimate>& off);

}  // namespace fracheat
