#include "hsel/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace hsel {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool is_na(const std::string& cell) {
  if (cell.empty()) return true;
  if (cell.size() != 2) return false;
  return std::toupper(static_cast<unsigned char>(cell[0])) == 'N' &&
         std::toupper(static_cast<unsigned char>(cell[1])) == 'A';
}

double parse_num(const std::string& cell, long row, const std::string& col) {
  char* end = nullptr;
  const char* begin = cell.c_str();
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw domain_error("row " + std::to_string(row) + ", column '" + col +
                       "': cannot parse '" + cell + "'");
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvBindings& bindings) {
  std::ifstream in(path);
  if (!in) throw domain_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw domain_error("'" + path + "' is empty");
  std::vector<std::string> header = split_line(line);
  std::unordered_map<std::string, int> col;
  for (size_t j = 0; j < header.size(); ++j) col[header[j]] = static_cast<int>(j);

  auto need = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end()) throw domain_error("column '" + name + "' not found in '" + path + "'");
    return it->second;
  };
  int ci = need(bindings.select);
  int yi = need(bindings.outcome);
  std::vector<int> xi, wi;
  for (const auto& nm : bindings.x_cols) xi.push_back(need(nm));
  for (const auto& nm : bindings.w_cols) wi.push_back(need(nm));
  if (xi.empty() && !bindings.intercept) throw domain_error("outcome design has no columns");
  if (wi.empty() && !bindings.intercept) throw domain_error("selection design has no columns");

  std::vector<uint8_t> c;
  std::vector<std::optional<double>> v1;
  std::vector<std::vector<double>> xr, wr;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_line(line);
    auto cell = [&](int j) -> const std::string& {
      static const std::string kEmpty;
      return j < static_cast<int>(cells.size()) ? cells[j] : kEmpty;
    };
    double cv = parse_num(cell(ci), row, bindings.select);
    if (cv != 0 && cv != 1)
      throw domain_error("row " + std::to_string(row) + ": selection indicator must be 0 or 1");
    bool sel = cv == 1;
    const std::string& ycell = cell(yi);
    if (sel) {
      if (is_na(ycell))
        throw domain_error("row " + std::to_string(row) + ": selected row has missing outcome");
      v1.push_back(parse_num(ycell, row, bindings.outcome));
    } else {
      if (!is_na(ycell))
        throw domain_error("row " + std::to_string(row) +
                           ": unselected row carries an observed outcome");
      v1.push_back(std::nullopt);
    }
    c.push_back(sel ? 1 : 0);
    std::vector<double> xv, wv;
    if (bindings.intercept) xv.push_back(1.0);
    for (size_t k = 0; k < xi.size(); ++k)
      xv.push_back(parse_num(cell(xi[k]), row, bindings.x_cols[k]));
    if (bindings.intercept) wv.push_back(1.0);
    for (size_t k = 0; k < wi.size(); ++k)
      wv.push_back(parse_num(cell(wi[k]), row, bindings.w_cols[k]));
    xr.push_back(std::move(xv));
    wr.push_back(std::move(wv));
  }
  const long n = static_cast<long>(c.size());
  if (n == 0) throw domain_error("'" + path + "' has no data rows");
  Eigen::MatrixXd x(n, xr[0].size()), w(n, wr[0].size());
  for (long i = 0; i < n; ++i) {
    for (size_t j = 0; j < xr[i].size(); ++j) x(i, j) = xr[i][j];
    for (size_t j = 0; j < wr[i].size(); ++j) w(i, j) = wr[i][j];
  }
  return Dataset(std::move(c), std::move(v1), std::move(x), std::move(w));
}

void write_simulated_csv(const std::string& path, const Dataset& data) {
  if (data.p() != 2 || data.q() != 3)
    throw domain_error("write_simulated_csv expects the 2-covariate simulation design");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw domain_error("cannot write '" + path + "'");
  std::fprintf(f, "c,y,w1,w2\n");
  for (long i = 0; i < data.n(); ++i) {
    if (data.selected(i))
      std::fprintf(f, "1,%.17g,%.17g,%.17g\n", data.outcome(i), data.w()(i, 1), data.w()(i, 2));
    else
      std::fprintf(f, "0,NA,%.17g,%.17g\n", data.w()(i, 1), data.w()(i, 2));
  }
  std::fclose(f);
}

}  // namespace hsel
