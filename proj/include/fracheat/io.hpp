#pragma once

// Persistence: rough paths as JSON lines, sample manifests, CSV tables for
// remainder norms and eigenvalue scans, and minimizer records.

#include "fracheat/expansion.hpp"
#include "fracheat/malliavin.hpp"
#include "fracheat/roughcore.hpp"
#include "fracheat/variational.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace fracheat {

using Json = nlohmann::json;

/// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

/// {dim, grid, lvl1 (d x N row-major), lvl2 (N blocks of d x d, each row-major)}.
Json rough_path_to_json(const GeometricRoughPath2& x);
GeometricRoughPath2 rough_path_from_json(const Json& j);

void write_rough_paths_jsonl(std::ostream& os, const std::vector<GeometricRoughPath2>& paths);
std::vector<GeometricRoughPath2> read_rough_paths_jsonl(std::istream& is);

Json sample_manifest(const Rational& hurst, int depth, std::uint64_t seed, int count);

/// Columns eps, k, kappa_next, pvar_norm.
void write_remainders_csv(std::ostream& os, const std::vector<RemainderRow>& rows);
/// Appends {k, slope, intercept, r2, slope_band} to manifest["fits"].
void append_fit(Json& manifest, int k, const OrderFit& fit);

/// Columns eps, sample, min_eig.
void write_eigen_csv(std::ostream& os, const ScanResult& scan);
Json scan_summary_json(const ScanResult& scan);

struct MinimizerRecord {
  Rational hurst{1, 2};
  Vec nodes;
  Mat coeffs;
  Vec nu_bar;
  double energy = 0.0;
  double endpoint_residual = 0.0;
  double lagrange_residual = 0.0;
  bool converged = false;

  CameronMartinPath gamma() const { return {hurst, nodes, coeffs}; }
};

Json minimizer_to_json(const MinimizerResult& result);
MinimizerRecord minimizer_from_json(const Json& j);

/// Whole-file helpers; throw Error naming the path on failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace fracheat
