#include "qcompat/state_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qcompat {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(where + ": missing field \"" + key + "\"");
  }
  return obj.at(key);
}

// Square real matrix; the dimension is taken from the row count.
Eigen::MatrixXd real_matrix(const json& rows, const std::string& where) {
  if (!rows.is_array() || rows.empty()) throw ParseError(where + ": expected a non-empty array of rows");
  const auto n = static_cast<Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (Index i = 0; i < n; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array()) throw ParseError(where + ": row " + std::to_string(i) + " is not an array");
    if (static_cast<Index>(row.size()) != n) {
      throw ValidationError(where, "matrix must be square", static_cast<double>(row.size()));
    }
    for (Index j = 0; j < n; ++j) {
      const json& v = row[static_cast<std::size_t>(j)];
      if (!v.is_number()) throw ParseError(where + ": non-numeric entry");
      m(i, j) = v.get<double>();
    }
  }
  return m;
}

Matrix complex_matrix(const json& obj, const std::string& where) {
  const Eigen::MatrixXd re = real_matrix(field(obj, "matrix_re", where), where + ".matrix_re");
  Matrix m = re.cast<Complex>();
  if (obj.contains("matrix_im")) {
    const Eigen::MatrixXd im = real_matrix(obj.at("matrix_im"), where + ".matrix_im");
    if (im.rows() != re.rows()) {
      throw ValidationError(where, "matrix_im must match matrix_re in size",
                            static_cast<double>(im.rows()));
    }
    m += Complex(0.0, 1.0) * im.cast<Complex>();
  }
  return m;
}

HermitianOperator hermitian(const Matrix& m, const std::string& label) {
  try {
    return HermitianOperator(m);
  } catch (const NonHermitian& e) {
    throw ValidationError(label, "matrix must be Hermitian (max |H - H^dagger| deviation)",
                          e.deviation());
  }
}

json matrix_rows(const Matrix& m, bool imag) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(imag ? m(i, j).imag() : m(i, j).real());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

StateSet parse_states(const std::string& json_text, double tol) {
  const json doc = parse_json(json_text);
  const json& dim_field = field(doc, "dim", "state file");
  if (!dim_field.is_number_integer() || dim_field.get<long long>() <= 0) {
    throw ParseError("state file: \"dim\" must be a positive integer");
  }
  const auto dim = static_cast<Index>(dim_field.get<long long>());
  const json& entries = field(doc, "states", "state file");
  if (!entries.is_array()) throw ParseError("state file: \"states\" must be an array");

  std::vector<DensityMatrix> states;
  std::vector<std::string> labels;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const json& e = entries[i];
    std::string label = "state " + std::to_string(i);
    if (e.is_object() && e.contains("label")) {
      if (!e.at("label").is_string()) throw ParseError(label + ": label must be a string");
      label = e.at("label").get<std::string>();
    }
    if (!seen.insert(label).second) {
      throw ValidationError(label, "labels must be unique", static_cast<double>(i));
    }
    const Matrix m = complex_matrix(e, label);
    if (m.rows() != dim) {
      throw ValidationError(label, "matrix dimension must equal dim " + std::to_string(dim),
                            static_cast<double>(m.rows()));
    }
    states.emplace_back(hermitian(m, label), tol, label);
    labels.push_back(std::move(label));
  }
  if (states.size() < 2) {
    throw ValidationError("state file", "at least two states", static_cast<double>(states.size()));
  }
  return StateSet(std::move(states), std::move(labels));
}

StateSet parse_state_file(const std::filesystem::path& path, double tol) {
  return parse_states(read_file(path), tol);
}

std::string states_to_json(const StateSet& s) {
  json doc;
  doc["dim"] = s.dim();
  doc["states"] = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    doc["states"].push_back({{"label", s.labels()[i]},
                             {"matrix_re", matrix_rows(s[i].matrix(), false)},
                             {"matrix_im", matrix_rows(s[i].matrix(), true)}});
  }
  return doc.dump(2) + "\n";
}

void write_state_file(const std::filesystem::path& path, const StateSet& s) {
  const std::string text = states_to_json(s);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
}

ConstraintSet parse_constraints(const std::string& json_text) {
  const json doc = parse_json(json_text);
  const json& obs = field(doc, "observables", "constraint file");
  const json& values = field(doc, "values", "constraint file");
  if (!obs.is_array() || !values.is_array()) {
    throw ParseError("constraint file: \"observables\" and \"values\" must be arrays");
  }
  if (obs.size() != values.size()) {
    throw ValidationError("constraint file", "one value per observable",
                          static_cast<double>(values.size()));
  }
  ConstraintSet out;
  if (doc.contains("dim")) {
    if (!doc.at("dim").is_number_integer() || doc.at("dim").get<long long>() <= 0) {
      throw ParseError("constraint file: \"dim\" must be a positive integer");
    }
    out.dim = static_cast<Index>(doc.at("dim").get<long long>());
  }
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::string where = "observable " + std::to_string(i);
    const Matrix m = complex_matrix(obs[i], where);
    if (out.dim == 0) out.dim = m.rows();
    if (m.rows() != out.dim) {
      throw ValidationError(where, "all observables must share one dimension",
                            static_cast<double>(m.rows()));
    }
    if (!values[i].is_number()) throw ParseError(where + ": value must be a number");
    out.constraints.push_back({hermitian(m, where), values[i].get<double>()});
  }
  if (out.dim == 0) throw ParseError("constraint file: \"dim\" is required when there are no observables");
  return out;
}

ConstraintSet parse_constraints_file(const std::filesystem::path& path) {
  return parse_constraints(read_file(path));
}

}  // namespace qcompat
