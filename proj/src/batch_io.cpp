#include "proxstair/batch_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace proxstair {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, std::size_t row) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Format,
                "row " + std::to_string(row) + ": bad number '" + s + "'");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

BatchCsv read_batch_csv(std::istream& in) {
  BatchCsv csv;
  if (!std::getline(in, csv.header))
    throw Error(ErrorCode::Format, "missing header line");
  auto head = split_csv(csv.header);
  if (head.size() < 5 || head[0] != "gamma" || head[1] != "x" || head[2] != "N" ||
      (head.size() - 3) % 2 != 0)
    throw Error(ErrorCode::Format, "bad header, expected gamma,x,N,d_1,w_1,...");
  const std::size_t nmax = (head.size() - 3) / 2;

  struct Row {
    ProxInstance inst;
    double x;
  };
  std::vector<Row> parsed;

  std::string line;
  std::size_t rowno = 0;
  while (std::getline(in, line)) {
    ++rowno;
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != head.size())
      throw Error(ErrorCode::Format,
                  "row " + std::to_string(rowno) + ": wrong field count");
    double gamma = parse_double(f[0], rowno);
    double x = parse_double(f[1], rowno);
    double nval = parse_double(f[2], rowno);
    auto n = static_cast<std::size_t>(nval);
    if (nval != static_cast<double>(n) || n < 1 || n > nmax)
      throw Error(ErrorCode::Format,
                  "row " + std::to_string(rowno) + ": bad N '" + f[2] + "'");
    std::vector<double> d(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = parse_double(f[3 + 2 * i], rowno);
      w[i] = parse_double(f[4 + 2 * i], rowno);
    }
    try {
      parsed.push_back({prepare_instance(d, w, gamma), x});
    } catch (const Error& e) {
      throw Error(ErrorCode::Format,
                  "row " + std::to_string(rowno) + ": " + e.what());
    }
    if (!std::isfinite(x))
      throw Error(ErrorCode::Format, "row " + std::to_string(rowno) + ": non-finite x");
    csv.rows.push_back(line);
  }

  std::size_t width = 1;
  for (const auto& r : parsed) width = std::max(width, r.inst.size());
  auto& b = csv.batch;
  b.rows = parsed.size();
  b.width = width;
  b.data.reserve(b.rows * width);
  b.weights.reserve(b.rows * width);
  for (const auto& r : parsed) {
    b.gamma.push_back(r.inst.gamma);
    b.x.push_back(r.x);
    for (std::size_t i = 0; i < width; ++i) {
      if (i < r.inst.size()) {
        b.data.push_back(r.inst.data[i]);
        b.weights.push_back(r.inst.weights[i]);
      } else {
        // zero-weight padding keeps the row nondecreasing
        b.data.push_back(r.inst.data.back());
        b.weights.push_back(0.0);
      }
    }
  }
  return csv;
}

void write_batch_csv(std::ostream& out, const BatchCsv& csv,
                     const std::vector<double>& y) {
  out << csv.header << ",y\n";
  for (std::size_t i = 0; i < csv.rows.size(); ++i)
    out << csv.rows[i] << ',' << format_double(y[i]) << '\n';
}

}  // namespace proxstair
