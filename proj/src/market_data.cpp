#include "qga/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "qga/rng.hpp"

namespace qga {

namespace {

using nlohmann::json;

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_price(const std::string& raw, const std::string& date,
                   const std::string& ticker) {
  const std::string cell = strip(raw);
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw std::runtime_error("non-numeric price for " + ticker + " on " + date);
  }
  if (!(value > 0.0)) {
    throw std::runtime_error("non-positive price for " + ticker + " on " + date);
  }
  return value;
}

void check_square(const std::vector<std::vector<double>>& m, std::size_t n,
                  const std::string& what) {
  if (m.size() != n) throw std::runtime_error(what + " row count mismatch");
  for (const auto& row : m) {
    if (row.size() != n) throw std::runtime_error(what + " column count mismatch");
  }
}

}  // namespace

PriceLoadResult load_prices(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open price file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("malformed header: empty file");
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = strip(h);
  std::string first = header.empty() ? "" : header.front();
  std::transform(first.begin(), first.end(), first.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (header.size() < 2 || first != "date") {
    throw std::runtime_error("malformed header: expected date,<ticker>,...");
  }

  PriceLoadResult result;
  result.table.tickers.assign(header.begin() + 1, header.end());
  {
    std::set<std::string> seen;
    for (const auto& t : result.table.tickers) {
      if (t.empty() || !seen.insert(t).second) {
        throw std::runtime_error("malformed header: blank or duplicate ticker");
      }
    }
  }

  const std::size_t cols = result.table.tickers.size();
  while (std::getline(in, line)) {
    if (strip(line).empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() > cols + 1) {
      throw std::runtime_error("malformed row: too many columns");
    }
    const std::string date = strip(fields.front());
    if (date.empty()) throw std::runtime_error("malformed row: missing date");

    bool missing = fields.size() < cols + 1;
    for (std::size_t i = 1; !missing && i < fields.size(); ++i) {
      if (strip(fields[i]).empty()) missing = true;
    }
    if (missing) {
      ++result.dropped_rows;
      continue;
    }

    std::vector<double> row(cols);
    for (std::size_t i = 0; i < cols; ++i) {
      row[i] = parse_price(fields[i + 1], date, result.table.tickers[i]);
    }
    if (!result.table.dates.empty() && date <= result.table.dates.back()) {
      throw std::runtime_error("dates not strictly increasing at " + date);
    }
    result.table.dates.push_back(date);
    result.table.prices.push_back(std::move(row));
  }

  if (result.table.dates.size() < 2) {
    throw std::runtime_error("fewer than 2 price rows survive");
  }
  return result;
}

ReturnTable compute_returns(const PriceTable& prices) {
  if (prices.dates.size() < 2) {
    throw std::runtime_error("need at least 2 price rows to compute returns");
  }
  ReturnTable out;
  const std::size_t cols = prices.tickers.size();
  out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  out.returns.resize(prices.dates.size() - 1);
  for (std::size_t t = 0; t + 1 < prices.dates.size(); ++t) {
    out.returns[t].resize(cols);
    for (std::size_t i = 0; i < cols; ++i) {
      out.returns[t][i] = prices.prices[t + 1][i] / prices.prices[t][i] - 1.0;
    }
  }
  return out;
}

MomentEstimate estimate_moments(const ReturnTable& returns) {
  const std::size_t rows = returns.returns.size();
  if (rows < 2) {
    throw std::runtime_error("need at least 2 return rows to estimate a covariance");
  }
  const std::size_t n = returns.returns.front().size();
  MomentEstimate m;
  m.mu.assign(n, 0.0);
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t i = 0; i < n; ++i) m.mu[i] += returns.returns[t][i];
  }
  for (std::size_t i = 0; i < n; ++i) m.mu[i] /= static_cast<double>(rows);

  m.sigma.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < rows; ++t) {
        acc += (returns.returns[t][i] - m.mu[i]) * (returns.returns[t][j] - m.mu[j]);
      }
      const double cov = acc / static_cast<double>(rows - 1);
      m.sigma[i][j] = cov;
      m.sigma[j][i] = cov;
    }
  }
  return m;
}

ProblemInstance sample_instance(const MarketUniverse& universe, std::size_t k,
                                double gamma, std::uint64_t seed) {
  const std::size_t m = universe.tickers.size();
  if (k < 1 || k > m) throw std::runtime_error("subset size exceeds universe");
  if (universe.mu.size() != m) throw std::runtime_error("universe mu size mismatch");
  check_square(universe.sigma, m, "universe sigma");

  Rng rng(seed);
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_below(m - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());

  ProblemInstance inst;
  inst.label = "k" + std::to_string(k) + "-s" + std::to_string(seed);
  inst.gamma = gamma;
  inst.tickers.reserve(k);
  inst.mu.reserve(k);
  for (std::size_t a : idx) {
    inst.tickers.push_back(universe.tickers[a]);
    inst.mu.push_back(universe.mu[a]);
  }
  inst.sigma.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      inst.sigma[r][c] = universe.sigma[idx[r]][idx[c]];
    }
  }
  validate_instance(inst);
  return inst;
}

void validate_instance(const ProblemInstance& inst) {
  const std::size_t n = inst.tickers.size();
  if (n == 0) throw std::runtime_error("instance has no tickers");
  {
    std::set<std::string> seen;
    for (const auto& t : inst.tickers) {
      if (t.empty() || !seen.insert(t).second) {
        throw std::runtime_error("instance tickers must be distinct and non-empty");
      }
    }
  }
  if (inst.mu.size() != n) throw std::runtime_error("mu length mismatch");
  check_square(inst.sigma, n, "sigma");
  for (double v : inst.mu) {
    if (!std::isfinite(v)) throw std::runtime_error("mu entries must be finite");
  }
  if (!std::isfinite(inst.gamma) || inst.gamma < 0.0) {
    throw std::runtime_error("gamma must be finite and >= 0");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(inst.sigma[i][j])) {
        throw std::runtime_error("sigma entries must be finite");
      }
      if (std::abs(inst.sigma[i][j] - inst.sigma[j][i]) > 1e-12) {
        throw std::runtime_error("sigma is not symmetric");
      }
    }
  }
  if (smallest_eigenvalue(inst.sigma) < -1e-9) {
    throw std::runtime_error("sigma is not positive semidefinite");
  }
}

void save_instance(const ProblemInstance& inst, const std::string& path) {
  validate_instance(inst);
  json j;
  j["label"] = inst.label;
  j["tickers"] = inst.tickers;
  j["mu"] = inst.mu;
  j["sigma"] = inst.sigma;
  j["gamma"] = inst.gamma;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  out << j.dump(2) << "\n";
}

ProblemInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("invalid instance JSON in " + path + ": " + e.what());
  }
  ProblemInstance inst;
  try {
    inst.label = j.at("label").get<std::string>();
    inst.tickers = j.at("tickers").get<std::vector<std::string>>();
    inst.mu = j.at("mu").get<std::vector<double>>();
    inst.sigma = j.at("sigma").get<std::vector<std::vector<double>>>();
    inst.gamma = j.at("gamma").get<double>();
  } catch (const json::exception& e) {
    throw std::runtime_error("instance schema mismatch in " + path + ": " + e.what());
  }
  validate_instance(inst);
  return inst;
}

double smallest_eigenvalue(const std::vector<std::vector<double>>& symmetric) {
  std::vector<std::vector<double>> a = symmetric;
  const std::size_t n = a.size();
  if (n == 0) throw std::runtime_error("empty matrix");
  if (n == 1) return a[0][0];

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  double least = a[0][0];
  for (std::size_t i = 1; i < n; ++i) least = std::min(least, a[i][i]);
  return least;
}

}  // namespace qga
