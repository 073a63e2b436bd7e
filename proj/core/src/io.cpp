#include "gpdiscrim/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gpdiscrim {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const char* context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() && !trim(s.substr(pos)).empty())
      throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(context) + ": cannot parse '" +
                                s + "' as a number");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_design_csv(std::ostream& os, const Design& design) {
  for (int j = 0; j < design.dim(); ++j) {
    if (j) os << ',';
    os << 'x' << (j + 1);
  }
  if (design.y) os << ",y";
  os << '\n';
  for (int i = 0; i < design.n(); ++i) {
    for (int j = 0; j < design.dim(); ++j) {
      if (j) os << ',';
      os << format_double(design.points(i, j));
    }
    if (design.y) os << ',' << format_double((*design.y)(i));
    os << '\n';
  }
}

Design read_design_csv(std::istream& is, bool has_observations) {
  std::string line;
  if (!std::getline(is, line))
    throw std::invalid_argument("read_design_csv: empty input");
  const int header_fields = static_cast<int>(split_csv_line(line).size());
  const int dim = has_observations ? header_fields - 1 : header_fields;
  if (dim < 1) throw std::invalid_argument("read_design_csv: no coordinates");

  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != header_fields)
      throw std::invalid_argument("read_design_csv: ragged row");
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(parse_double(f, "design csv"));
    rows.push_back(std::move(row));
  }
  Design design;
  design.points.resize(rows.size(), dim);
  if (has_observations) design.y = Vector(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < dim; ++j) design.points(i, j) = rows[i][j];
    if (has_observations) (*design.y)(i) = rows[i][dim];
  }
  return design;
}

void write_measure_csv(std::ostream& os, const DesignMeasure& xi) {
  for (int j = 0; j < xi.dim(); ++j) os << 'x' << (j + 1) << ',';
  os << "weight\n";
  for (int i = 0; i < xi.size(); ++i) {
    for (int j = 0; j < xi.dim(); ++j)
      os << format_double(xi.support(i, j)) << ',';
    os << format_double(xi.weights(i)) << '\n';
  }
}

DesignMeasure read_measure_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw std::invalid_argument("read_measure_csv: empty input");
  const int fields = static_cast<int>(split_csv_line(line).size());
  const int dim = fields - 1;
  if (dim < 1) throw std::invalid_argument("read_measure_csv: no coordinates");
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (static_cast<int>(f.size()) != fields)
      throw std::invalid_argument("read_measure_csv: ragged row");
    std::vector<double> row;
    for (const auto& v : f) row.push_back(parse_double(v, "measure csv"));
    rows.push_back(std::move(row));
  }
  DesignMeasure xi;
  xi.support.resize(rows.size(), dim);
  xi.weights.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < dim; ++j) xi.support(i, j) = rows[i][j];
    xi.weights(i) = rows[i][dim];
  }
  return xi;
}

void write_table_csv(std::ostream& os, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) os << ',';
    os << header[j];
  }
  os << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("write_table_csv: ragged row");
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) os << ',';
      os << format_double(row[j]);
    }
    os << '\n';
  }
}

std::string kernel_spec_to_text(const KernelSpec& spec) {
  std::ostringstream os;
  os << "family = " << family_name(spec.family) << '\n';
  switch (spec.family) {
    case KernelFamily::kMatern32:
    case KernelFamily::kMatern52:
      os << "sigma2 = " << format_double(spec.sigma2) << '\n';
      os << "theta = " << format_double(spec.theta) << '\n';
      break;
    case KernelFamily::kMaternGeneral:
      os << "sigma2 = " << format_double(spec.sigma2) << '\n';
      os << "theta = " << format_double(spec.theta) << '\n';
      os << "nu = " << format_double(spec.nu) << '\n';
      break;
    case KernelFamily::kExponential:
      os << "sigma2 = " << format_double(spec.sigma2) << '\n';
      os << "alpha = " << format_double(spec.alpha) << '\n';
      break;
    case KernelFamily::kExponentialScaled:
      os << "alpha = " << format_double(spec.alpha) << '\n';
      break;
  }
  return os.str();
}

KernelSpec kernel_spec_from_text(const std::string& text) {
  KernelSpec spec;
  bool have_family = false;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("kernel spec: expected 'key = value', got '" +
                                  line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "family") {
      spec.family = parse_family(value);
      have_family = true;
    } else if (key == "sigma2") {
      spec.sigma2 = parse_double(value, "kernel spec sigma2");
    } else if (key == "theta") {
      spec.theta = parse_double(value, "kernel spec theta");
    } else if (key == "nu") {
      spec.nu = parse_double(value, "kernel spec nu");
    } else if (key == "alpha") {
      spec.alpha = parse_double(value, "kernel spec alpha");
    } else {
      throw std::invalid_argument("kernel spec: unknown key '" + key + "'");
    }
  }
  if (!have_family)
    throw std::invalid_argument("kernel spec: missing 'family'");
  spec.validate();
  return spec;
}

}  // namespace gpdiscrim
