#include "ppipw/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ppipw/errors.hpp"

namespace ppipw {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // Trim surrounding whitespace and a possible trailing CR.
    auto begin = cell.find_first_not_of(" \t\r");
    auto end = cell.find_last_not_of(" \t\r");
    cells.push_back(begin == std::string::npos ? "" : cell.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_number(const std::string& cell, std::size_t row, const std::string& column) {
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(cell, &consumed);
  } catch (const std::exception&) {
    throw ParseError("row " + std::to_string(row) + ", column '" + column +
                     "': cannot parse '" + cell + "' as a number");
  }
  if (consumed != cell.size())
    throw ParseError("row " + std::to_string(row) + ", column '" + column +
                     "': trailing characters in '" + cell + "'");
  if (!std::isfinite(value))
    throw ParseError("row " + std::to_string(row) + ", column '" + column +
                     "': non-finite value");
  return value;
}

}  // namespace

void CsvSchema::validate() const {
  if (covariate_columns.empty())
    throw InvalidInputError("CsvSchema: need at least one covariate column");
  std::set<std::string> names(covariate_columns.begin(), covariate_columns.end());
  names.insert(treatment_column);
  names.insert(outcome_column);
  if (names.size() != covariate_columns.size() + 2)
    throw InvalidInputError("CsvSchema: column names must be distinct");
}

StagedTable load_csv(const std::string& path, const CsvSchema& schema) {
  schema.validate();
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw ParseError("'" + path + "': empty file");
  auto header = split_line(line);

  auto column_index = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw ParseError("'" + path + "': header is missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::size_t t_col = column_index(schema.treatment_column);
  std::size_t y_col = column_index(schema.outcome_column);
  std::vector<std::size_t> x_cols;
  for (const auto& name : schema.covariate_columns) x_cols.push_back(column_index(name));

  std::vector<std::vector<double>> x_rows;
  std::vector<int> t_vals;
  std::vector<double> y_vals;
  std::size_t row = 1;  // 1-based, header is row 0
  while (std::getline(in, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_line(line);
    if (cells.size() != header.size())
      throw ParseError("row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " cells, got " +
                       std::to_string(cells.size()));
    double t_raw = parse_number(cells[t_col], row, schema.treatment_column);
    if (t_raw != 0.0 && t_raw != 1.0)
      throw ParseError("row " + std::to_string(row) + ": treatment value " +
                       cells[t_col] + " is not 0 or 1");
    t_vals.push_back(static_cast<int>(t_raw));
    y_vals.push_back(parse_number(cells[y_col], row, schema.outcome_column));
    std::vector<double> x;
    for (std::size_t k = 0; k < x_cols.size(); ++k)
      x.push_back(parse_number(cells[x_cols[k]], row, schema.covariate_columns[k]));
    x_rows.push_back(std::move(x));
    ++row;
  }
  if (x_rows.empty()) throw ParseError("'" + path + "': no data rows");

  StagedTable staged;
  staged.covariates.resize(static_cast<Eigen::Index>(x_rows.size()),
                           static_cast<Eigen::Index>(x_cols.size()));
  staged.treatments.resize(static_cast<Eigen::Index>(t_vals.size()));
  staged.outcomes.resize(static_cast<Eigen::Index>(y_vals.size()));
  for (std::size_t i = 0; i < x_rows.size(); ++i) {
    for (std::size_t j = 0; j < x_cols.size(); ++j)
      staged.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          x_rows[i][j];
    staged.treatments[static_cast<Eigen::Index>(i)] = t_vals[i];
    staged.outcomes[static_cast<Eigen::Index>(i)] = y_vals[i];
  }
  return staged;
}

NormalizedDataset normalize_unit_ball(const StagedTable& staged) {
  if (staged.covariates.rows() == 0)
    throw InvalidInputError("normalize_unit_ball: no rows");
  double max_norm = staged.covariates.rowwise().norm().maxCoeff();
  double factor = max_norm > 0.0 ? max_norm : 1.0;
  Eigen::MatrixXd scaled = staged.covariates / factor;
  return NormalizedDataset{Dataset(std::move(scaled), staged.treatments, staged.outcomes),
                           factor};
}

std::pair<Dataset, Dataset> resample(const Dataset& data, const ResampleProtocol& protocol,
                                     RngStream& stream) {
  if (protocol.fit_per_arm < 1 || protocol.estimate_per_arm < 1)
    throw InvalidInputError("resample: per-arm counts must be >= 1");

  std::vector<std::size_t> treated, control;
  for (Eigen::Index i = 0; i < data.n_rows(); ++i)
    (data.treatments()[i] == 1 ? treated : control).push_back(static_cast<std::size_t>(i));
  if (treated.empty() || control.empty())
    throw InvalidInputError("resample: each treatment arm needs at least one unit");

  auto with_replacement = [&](const std::vector<std::size_t>& pool, Eigen::Index count,
                              std::vector<std::size_t>& out) {
    for (Eigen::Index k = 0; k < count; ++k)
      out.push_back(pool[stream.uniform_index(pool.size())]);
  };

  std::vector<std::size_t> fit_idx, est_idx;
  if (protocol.kind == ResampleKind::ihdp_balanced) {
    with_replacement(treated, protocol.fit_per_arm, fit_idx);
    with_replacement(control, protocol.fit_per_arm, fit_idx);
    with_replacement(treated, protocol.estimate_per_arm, est_idx);
    with_replacement(control, protocol.estimate_per_arm, est_idx);
  } else {
    // Estimate set first, without replacement; fit set with replacement from
    // what is left.
    std::vector<std::size_t> fit_pool_t, fit_pool_c;
    for (auto [arm, pool] : {std::pair{&treated, &fit_pool_t}, std::pair{&control, &fit_pool_c}}) {
      if (protocol.estimate_per_arm > static_cast<Eigen::Index>(arm->size()))
        throw InvalidInputError(
            "resample: without-replacement draw of " +
            std::to_string(protocol.estimate_per_arm) + " exceeds arm size " +
            std::to_string(arm->size()));
      auto perm = stream.permutation(arm->size());
      for (std::size_t k = 0; k < arm->size(); ++k) {
        auto idx = (*arm)[perm[k]];
        if (k < static_cast<std::size_t>(protocol.estimate_per_arm))
          est_idx.push_back(idx);
        else
          pool->push_back(idx);
      }
      if (pool->empty())
        throw InvalidInputError("resample: no units left for the fit pool in one arm");
    }
    with_replacement(fit_pool_t, protocol.fit_per_arm, fit_idx);
    with_replacement(fit_pool_c, protocol.fit_per_arm, fit_idx);
  }
  return {data.select(fit_idx), data.select(est_idx)};
}

}  // namespace ppipw
