#include "ssglm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "ssglm/error.hpp"

namespace ssglm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_line(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

Dataset Dataset::from_matrix(Vector y, Matrix X, std::vector<std::string> labels, bool center) {
  if (y.size() != X.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "dataset: response and design rows differ");
  }
  if (labels.empty()) {
    for (Index c = 0; c < X.cols(); ++c) labels.push_back("x" + std::to_string(c + 1));
  }
  if (static_cast<Index>(labels.size()) != X.cols()) {
    throw Error(ErrorCode::dimension_mismatch, "dataset: label count differs from column count");
  }
  Dataset d;
  d.y = std::move(y);
  d.X = std::move(X);
  d.labels = std::move(labels);
  d.centered.assign(static_cast<std::size_t>(d.X.cols()), false);
  d.column_means = Vector::Zero(d.X.cols());
  if (center) d.center_columns();
  return d;
}

void Dataset::center_columns() {
  if (centered.size() != static_cast<std::size_t>(X.cols())) {
    centered.assign(static_cast<std::size_t>(X.cols()), false);
  }
  if (column_means.size() != X.cols()) column_means = Vector::Zero(X.cols());
  for (Index c = 0; c < X.cols(); ++c) {
    if (centered[static_cast<std::size_t>(c)]) continue;
    const double m = X.col(c).mean();
    X.col(c).array() -= m;
    column_means[c] = m;
    centered[static_cast<std::size_t>(c)] = true;
  }
}

Matrix Dataset::uncentered() const {
  Matrix out = X;
  for (Index c = 0; c < X.cols(); ++c) {
    if (c < column_means.size()) out.col(c).array() += column_means[c];
  }
  return out;
}

Index Dataset::column_index(const std::string& label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw Error(ErrorCode::missing_column, "no column named '" + label + "'");
  return static_cast<Index>(it - labels.begin());
}

void validate_dataset(const Dataset& data, const Family& family) {
  if (data.y.size() != data.X.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "dataset: response and design rows differ");
  }
  for (Index i = 0; i < data.y.size(); ++i) {
    if (!family.valid_response(data.y[i])) {
      std::ostringstream msg;
      msg << "response value " << data.y[i] << " in row " << i + 1 << " is not valid for the "
          << family.name() << " family";
      throw Error(ErrorCode::invalid_response, msg.str());
    }
  }
  if (!data.X.allFinite()) {
    for (Index c = 0; c < data.X.cols(); ++c) {
      for (Index i = 0; i < data.X.rows(); ++i) {
        if (!std::isfinite(data.X(i, c))) {
          throw Error(ErrorCode::non_finite_value,
                      "non-finite design value in row " + std::to_string(i + 1) + ", column " +
                          (c < static_cast<Index>(data.labels.size()) ? data.labels[c]
                                                                      : std::to_string(c + 1)));
        }
      }
    }
  }
}

Dataset load_dataset(const std::string& path, const std::string& response_column,
                     const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      for (const auto f : split_line(line, options.delimiter)) header.emplace_back(f);
      break;
    }
  }
  if (header.empty()) throw Error(ErrorCode::parse_error, "'" + path + "' has no header row");

  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k].empty()) {
      throw Error(ErrorCode::parse_error, "header column " + std::to_string(k + 1) + " is unnamed");
    }
    if (!seen.emplace(header[k], k).second) {
      throw Error(ErrorCode::duplicate_column, "duplicate column name '" + header[k] + "'");
    }
  }
  const auto resp = seen.find(response_column);
  if (resp == seen.end()) {
    throw Error(ErrorCode::missing_column,
                "response column '" + response_column + "' not found in '" + path + "'");
  }
  const std::size_t resp_idx = resp->second;
  const std::size_t width = header.size();

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_line(line, options.delimiter);
    if (fields.size() != width) {
      throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + " has " +
                                              std::to_string(fields.size()) + " fields, expected " +
                                              std::to_string(width));
    }
    for (std::size_t k = 0; k < width; ++k) {
      const std::string_view f = fields[k];
      const std::string where = "row " + std::to_string(rows + 1) + " (line " +
                                std::to_string(line_no) + "), column '" + header[k] + "'";
      if (f.empty() || f == "NA" || f == "NaN" || f == "nan") {
        throw Error(ErrorCode::missing_value, "missing value at " + where);
      }
      double v = 0;
      const char* begin = f.data();
      if (*begin == '+') ++begin;
      const auto res = std::from_chars(begin, f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw Error(ErrorCode::parse_error,
                    "non-numeric value '" + std::string(f) + "' at " + where);
      }
      if (!std::isfinite(v)) throw Error(ErrorCode::non_finite_value, "non-finite value at " + where);
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::parse_error, "'" + path + "' has no data rows");

  const auto n = static_cast<Index>(rows);
  const auto p = static_cast<Index>(width - 1);
  Vector y(n);
  Matrix X(n, p);
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < width; ++k) {
    if (k != resp_idx) labels.push_back(header[k]);
  }
  for (Index i = 0; i < n; ++i) {
    Index c = 0;
    for (std::size_t k = 0; k < width; ++k) {
      const double v = values[static_cast<std::size_t>(i) * width + k];
      if (k == resp_idx) {
        y[i] = v;
      } else {
        X(i, c++) = v;
      }
    }
  }
  Dataset d = Dataset::from_matrix(std::move(y), std::move(X), std::move(labels), options.center);
  d.response_label = response_column;
  return d;
}

void write_dataset(const std::string& path, const Dataset& data, char delimiter) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
  const Matrix X = data.uncentered();
  out << data.response_label;
  for (const auto& l : data.labels) out << delimiter << l;
  out << '\n';
  for (Index i = 0; i < X.rows(); ++i) {
    out << format_double(data.y[i]);
    for (Index c = 0; c < X.cols(); ++c) out << delimiter << format_double(X(i, c));
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::io_error, "write to '" + path + "' failed");
}

Dataset expand_interactions(const Dataset& data, const std::string& modifier_column,
                            const std::vector<std::string>& target_columns,
                            const std::string& prefix) {
  const Index mod = data.column_index(modifier_column);
  const Matrix raw = data.uncentered();
  const Vector m = raw.col(mod);
  for (Index i = 0; i < m.size(); ++i) {
    if (m[i] != 0.0 && m[i] != 1.0) {
      std::ostringstream msg;
      msg << "modifier column '" << modifier_column << "' has non-binary value " << m[i]
          << " in row " << i + 1;
      throw Error(ErrorCode::non_binary_modifier, msg.str());
    }
  }

  const Index p = data.cols();
  const auto extra = static_cast<Index>(target_columns.size());
  Dataset out = data;
  out.X.conservativeResize(Eigen::NoChange, p + extra);
  out.column_means.conservativeResize(p + extra);
  for (Index k = 0; k < extra; ++k) {
    const std::string& target = target_columns[static_cast<std::size_t>(k)];
    const Index t = data.column_index(target);
    const std::string label = prefix + target;
    if (std::find(out.labels.begin(), out.labels.end(), label) != out.labels.end()) {
      throw Error(ErrorCode::duplicate_column, "interaction column '" + label + "' already exists");
    }
    out.X.col(p + k) = m.cwiseProduct(raw.col(t));
    out.column_means[p + k] = 0.0;
    out.labels.push_back(label);
    out.centered.push_back(false);
  }
  const bool any_centered = std::any_of(data.centered.begin(), data.centered.end(),
                                        [](bool c) { return c; });
  if (any_centered) out.center_columns();
  return out;
}

}  // namespace ssglm
