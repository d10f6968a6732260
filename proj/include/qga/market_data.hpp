#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace qga {

// Daily close prices: |dates| rows by |tickers| columns, every cell > 0,
// dates ISO-8601 and strictly increasing.
struct PriceTable {
  std::vector<std::string> dates;
  std::vector<std::string> tickers;
  std::vector<std::vector<double>> prices;
};

struct PriceLoadResult {
  PriceTable table;
  std::size_t dropped_rows = 0;  // rows removed because a cell was empty
};

// Simple returns between consecutive surviving dates; row t is dated by the
// later of the two days it spans.
struct ReturnTable {
  std::vector<std::string> dates;
  std::vector<std::vector<double>> returns;
};

struct MomentEstimate {
  std::vector<double> mu;                    // per-asset mean return
  std::vector<std::vector<double>> sigma;    // sample covariance, symmetric
};

// Full asset universe a subset instance is drawn from.
struct MarketUniverse {
  std::vector<std::string> tickers;
  std::vector<double> mu;
  std::vector<std::vector<double>> sigma;
};

// One optimization problem: pick a subset of these tickers maximizing
// mu'x - gamma * x'Sigma x over x in {0,1}^n.
struct ProblemInstance {
  std::string label;
  std::vector<std::string> tickers;
  std::vector<double> mu;
  std::vector<std::vector<double>> sigma;  // row-major rows
  double gamma = 1.0;

  std::size_t dimension() const { return tickers.size(); }
};

// Parses a price CSV with header "date,<ticker>,...". Rows with an empty
// cell are dropped (counted); a non-numeric or non-positive price is an
// error, as are a malformed header, non-increasing dates, or fewer than two
// surviving rows.
PriceLoadResult load_prices(const std::string& path);

// returns[t][i] = prices[t+1][i] / prices[t][i] - 1
ReturnTable compute_returns(const PriceTable& prices);

// Column means and sample covariance (T-1 denominator); needs >= 2 rows.
MomentEstimate estimate_moments(const ReturnTable& returns);

// Draws k distinct tickers uniformly without replacement (seeded, sorted by
// universe position) and extracts the matching sub-moments.
ProblemInstance sample_instance(const MarketUniverse& universe, std::size_t k,
                                double gamma, std::uint64_t seed);

// Throws when any ProblemInstance invariant fails: consistent sizes,
// distinct tickers, finite entries, gamma >= 0, sigma symmetric within
// 1e-12, smallest eigenvalue >= -1e-9.
void validate_instance(const ProblemInstance& instance);

void save_instance(const ProblemInstance& instance, const std::string& path);
ProblemInstance load_instance(const std::string& path);

// Smallest eigenvalue of a symmetric matrix (cyclic Jacobi).
double smallest_eigenvalue(const std::vector<std::vector<double>>& symmetric);

}  // namespace qga
