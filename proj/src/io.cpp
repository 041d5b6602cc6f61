#include "fracheat/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace fracheat {

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

Json row_major(const Mat& m) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

Mat from_row_major(const Json& arr, Eigen::Index rows, Eigen::Index cols, std::size_t offset = 0) {
  if (arr.size() < offset + static_cast<std::size_t>(rows * cols)) throw DimensionError("JSON array too short");
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = arr[offset + static_cast<std::size_t>(i * cols + j)].get<double>();
  return m;
}

Json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec vec_from(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Json rough_path_to_json(const GeometricRoughPath2& x) {
  Json lvl2 = Json::array();
  for (const auto& m : x.lvl2())
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) lvl2.push_back(m(i, j));
  return {{"dim", x.dim()}, {"grid", x.grid()}, {"lvl1", row_major(x.lvl1())}, {"lvl2", std::move(lvl2)}};
}

GeometricRoughPath2 rough_path_from_json(const Json& j) {
  try {
    const int d = j.at("dim").get<int>();
    auto grid = j.at("grid").get<std::vector<double>>();
    if (grid.size() < 2) throw DimensionError("rough path record needs at least two grid points");
    const auto n = static_cast<Eigen::Index>(grid.size()) - 1;
    const Json& l2 = j.at("lvl2");
    if (l2.size() != static_cast<std::size_t>(n * d * d)) throw DimensionError("rough path record: lvl2 size");
    std::vector<Mat> lvl2;
    lvl2.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) lvl2.push_back(from_row_major(l2, d, d, static_cast<std::size_t>(k * d * d)));
    return {std::move(grid), from_row_major(j.at("lvl1"), d, n), std::move(lvl2)};
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed rough path record: ") + e.what());
  }
}

void write_rough_paths_jsonl(std::ostream& os, const std::vector<GeometricRoughPath2>& paths) {
  for (const auto& p : paths) os << rough_path_to_json(p).dump() << '\n';
}

std::vector<GeometricRoughPath2> read_rough_paths_jsonl(std::istream& is) {
  std::vector<GeometricRoughPath2> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(rough_path_from_json(Json::parse(line)));
  }
  return out;
}

Json sample_manifest(const Rational& hurst, int depth, std::uint64_t seed, int count) {
  return {{"H", hurst.str()}, {"depth", depth}, {"seed", seed}, {"count", count}};
}

void write_remainders_csv(std::ostream& os, const std::vector<RemainderRow>& rows) {
  os << "eps,k,kappa_next,pvar_norm\n";
  for (const auto& r : rows)
    os << format_double(r.eps) << ',' << r.k << ',' << format_double(r.kappa_next) << ',' << format_double(r.pvar_norm)
       << '\n';
}

void append_fit(Json& manifest, int k, const OrderFit& fit) {
  manifest["fits"].push_back(
      {{"k", k}, {"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}, {"slope_band", fit.slope_band}});
}

void write_eigen_csv(std::ostream& os, const ScanResult& scan) {
  os << "eps,sample,min_eig\n";
  for (const auto& r : scan.rows) os << format_double(r.eps) << ',' << r.sample << ',' << format_double(r.min_eig) << '\n';
}

Json scan_summary_json(const ScanResult& scan) {
  Json out = Json::array();
  for (const auto& s : scan.summary) {
    Json q = Json::array(), t = Json::array();
    for (const auto& [level, value] : s.quantiles) q.push_back({{"level", level}, {"value", value}});
    for (const auto& [rho, prob] : s.tail) t.push_back({{"rho", rho}, {"prob_below", prob}});
    out.push_back({{"eps", s.eps}, {"quantiles", q}, {"tail", t}});
  }
  return out;
}

Json minimizer_to_json(const MinimizerResult& r) {
  const CameronMartinPath& g = r.gamma_bar;
  Json coeffs = Json::array();
  for (int i = 0; i < g.dim(); ++i) coeffs.push_back(vec_json(g.coeffs().col(i)));
  return {{"H", g.hurst().str()},
          {"nodes", vec_json(g.nodes())},
          {"coeffs", coeffs},
          {"nu_bar", vec_json(r.nu_bar)},
          {"energy", r.energy},
          {"residuals", {{"endpoint", r.endpoint_residual}, {"lagrange", r.lagrange_residual}}},
          {"converged", r.converged},
          {"distinct_basins", r.distinct_basins}};
}

MinimizerRecord minimizer_from_json(const Json& j) {
  try {
    MinimizerRecord r;
    r.hurst = Rational::parse(j.at("H").get<std::string>());
    r.nodes = vec_from(j.at("nodes"));
    const Json& c = j.at("coeffs");
    r.coeffs.resize(r.nodes.size(), static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Vec col = vec_from(c[i]);
      if (col.size() != r.nodes.size()) throw DimensionError("minimizer record: coefficient column length");
      r.coeffs.col(static_cast<Eigen::Index>(i)) = col;
    }
    r.nu_bar = vec_from(j.at("nu_bar"));
    r.energy = j.at("energy").get<double>();
    r.endpoint_residual = j.at("residuals").at("endpoint").get<double>();
    r.lagrange_residual = j.at("residuals").at("lagrange").get<double>();
    r.converged = j.value("converged", false);
    return r;
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed minimizer record: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace fracheat
