#include "qsd/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qsd/error.hpp"

namespace qsd {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw precondition_error("descriptor field " + path + ": " + what);
}

const Json& need(const Json& doc, const char* key, const std::string& path) {
  if (!doc.is_object()) fail(path.empty() ? "/" : path, "expected an object");
  auto it = doc.find(key);
  if (it == doc.end()) fail(path + "/" + key, "missing");
  return *it;
}

double as_real(const Json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    char* end = nullptr;
    double x = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') fail(path, "not a real number");
    return x;
  }
  fail(path, "expected a number");
}

int as_int(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

std::vector<int> as_int_list(const Json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of integers");
  std::vector<int> out;
  for (size_t i = 0; i < v.size(); ++i) out.push_back(as_int(v[i], path + "/" + std::to_string(i)));
  return out;
}

Json real_out(double x, bool hexfloat) {
  if (!hexfloat) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return std::string(buf);
}

Json grid_out(const Matrix& m, bool real_part, bool hexfloat) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j)
      row.push_back(real_out(real_part ? m(i, j).real() : m(i, j).imag(), hexfloat));
    rows.push_back(row);
  }
  return rows;
}

// reads "re"/"im" grids of the expected shape; a missing "im" means zeros
Matrix grid_in(const Json& doc, int rows, int cols, const std::string& path) {
  const Json& re = need(doc, "re", path);
  if (!re.is_array() || static_cast<int>(re.size()) != rows)
    fail(path + "/re", "expected " + std::to_string(rows) + " rows");
  Matrix m = Matrix::Zero(rows, cols);
  auto read_part = [&](const Json& part, const char* name, bool real_part) {
    for (int i = 0; i < rows; ++i) {
      const std::string rp = path + "/" + name + "/" + std::to_string(i);
      if (!part[i].is_array() || static_cast<int>(part[i].size()) != cols)
        fail(rp, "expected " + std::to_string(cols) + " entries");
      for (int j = 0; j < cols; ++j) {
        double v = as_real(part[i][j], rp + "/" + std::to_string(j));
        if (real_part)
          m(i, j) += v;
        else
          m(i, j) += std::complex<double>(0.0, v);
      }
    }
  };
  read_part(re, "re", true);
  if (auto it = doc.find("im"); it != doc.end()) {
    if (!it->is_array() || static_cast<int>(it->size()) != rows)
      fail(path + "/im", "expected " + std::to_string(rows) + " rows");
    read_part(*it, "im", false);
  }
  return m;
}

Json matrix_to_json(const Matrix& m, bool hexfloat) {
  Json doc;
  doc["rows"] = static_cast<int>(m.rows());
  doc["cols"] = static_cast<int>(m.cols());
  doc["re"] = grid_out(m, true, hexfloat);
  doc["im"] = grid_out(m, false, hexfloat);
  return doc;
}

Matrix matrix_from_json(const Json& doc, const std::string& path) {
  int rows = as_int(need(doc, "rows", path), path + "/rows");
  int cols = as_int(need(doc, "cols", path), path + "/cols");
  if (rows < 1 || cols < 1) fail(path, "matrix shape must be positive");
  return grid_in(doc, rows, cols, path);
}

std::vector<DensityOperator> states_in(const Json& list, const std::string& path,
                                       const Tolerances& tol) {
  if (!list.is_array() || list.empty()) fail(path, "expected a nonempty array of operators");
  std::vector<DensityOperator> out;
  for (size_t i = 0; i < list.size(); ++i) {
    HermitianOperator op = operator_from_json(list[i], tol);
    out.emplace_back(op, TraceMode::normalized, tol);
  }
  return out;
}

bool needs_quotes(const std::string& s) {
  return s.find_first_of(",\"\r\n") != std::string::npos;
}

}  // namespace

Json operator_to_json(const HermitianOperator& op, bool hexfloat) {
  Json doc;
  doc["dim"] = op.dim();
  doc["factors"] =
      op.factor_dims.empty() ? std::vector<int>{op.dim()} : op.factor_dims;
  doc["re"] = grid_out(op.entries, true, hexfloat);
  doc["im"] = grid_out(op.entries, false, hexfloat);
  return doc;
}

HermitianOperator operator_from_json(const Json& doc, const Tolerances& tol) {
  int dim = as_int(need(doc, "dim", ""), "/dim");
  if (dim < 1) fail("/dim", "must be positive");
  std::vector<int> factors{dim};
  if (auto it = doc.find("factors"); it != doc.end()) {
    factors = as_int_list(*it, "/factors");
    long long prod = 1;
    for (int f : factors) prod *= f;
    if (prod != dim) fail("/factors", "product must equal dim");
  }
  Matrix m = grid_in(doc, dim, dim, "");
  return HermitianOperator(m, factors, tol);
}

DensityOperator state_from_json(const Json& doc, const Tolerances& tol) {
  return DensityOperator(operator_from_json(doc, tol), TraceMode::normalized, tol);
}

Json set_to_json(const StateSet& set, bool hexfloat) {
  Json doc;
  doc["kind"] = to_string(set.kind);
  doc["dim"] = set.dim;
  switch (set.kind) {
    case SetKind::singleton:
      doc["state"] = operator_to_json(set.generators.at(0), hexfloat);
      break;
    case SetKind::hull: {
      Json states = Json::array();
      for (const auto& g : set.generators) states.push_back(operator_to_json(g, hexfloat));
      doc["states"] = states;
      break;
    }
    case SetKind::conditional:
      doc["dims"] = set.factor_dims;
      doc["identity_positions"] = set.identity_positions;
      doc["identity_weight"] = set.identity_weight;
      break;
    case SetKind::channel_image: {
      Json kraus = Json::array();
      for (const auto& k : set.kraus) kraus.push_back(matrix_to_json(k, hexfloat));
      doc["kraus"] = kraus;
      doc["input_dim"] = set.input_dim;
      doc["output_dims"] = set.factor_dims;
      break;
    }
    case SetKind::incoherent:
      doc["dims"] = set.factor_dims;
      break;
    case SetKind::rains:
      doc["dims"] = set.factor_dims;
      doc["transpose_positions"] = set.transpose_positions;
      break;
    case SetKind::mana:
      break;
    case SetKind::tensor_power:
      fail("/kind", "tensor_power is a load-time descriptor only");
  }
  return doc;
}

StateSet set_from_json(const Json& doc, const Tolerances& tol) {
  const Json& kind_field = need(doc, "kind", "");
  if (!kind_field.is_string()) fail("/kind", "expected a string");
  const std::string kind = kind_field.get<std::string>();

  if (kind == "singleton") {
    HermitianOperator op = operator_from_json(need(doc, "state", ""), tol);
    return StateSet::singleton(DensityOperator(op, TraceMode::normalized, tol));
  }
  if (kind == "hull") return StateSet::hull(states_in(need(doc, "states", ""), "/states", tol));
  if (kind == "conditional") {
    std::vector<int> dims = as_int_list(need(doc, "dims", ""), "/dims");
    std::vector<int> pos = as_int_list(need(doc, "identity_positions", ""), "/identity_positions");
    double w = as_real(need(doc, "identity_weight", ""), "/identity_weight");
    return StateSet::conditional(dims, pos, w);
  }
  if (kind == "channel_image") {
    const Json& klist = need(doc, "kraus", "");
    if (!klist.is_array() || klist.empty()) fail("/kraus", "expected a nonempty array");
    std::vector<Matrix> kraus;
    for (size_t i = 0; i < klist.size(); ++i)
      kraus.push_back(matrix_from_json(klist[i], "/kraus/" + std::to_string(i)));
    int input_dim = as_int(need(doc, "input_dim", ""), "/input_dim");
    std::vector<int> out_dims;
    if (auto it = doc.find("output_dims"); it != doc.end())
      out_dims = as_int_list(*it, "/output_dims");
    return StateSet::channel_image(kraus, input_dim, out_dims);
  }
  if (kind == "incoherent") {
    if (auto it = doc.find("dims"); it != doc.end())
      return StateSet::incoherent(as_int_list(*it, "/dims"));
    return StateSet::incoherent(as_int(need(doc, "dim", ""), "/dim"));
  }
  if (kind == "rains") {
    std::vector<int> dims = as_int_list(need(doc, "dims", ""), "/dims");
    std::vector<int> pos = as_int_list(need(doc, "transpose_positions", ""), "/transpose_positions");
    return StateSet::rains(dims, pos);
  }
  if (kind == "mana") return StateSet::mana(as_int(need(doc, "dim", ""), "/dim"));
  if (kind == "tensor_power") {
    int copies = as_int(need(doc, "copies", ""), "/copies");
    if (copies < 1) fail("/copies", "must be at least 1");
    StateSet base = set_from_json(need(doc, "base", ""), tol);
    StateSet out = base;
    for (int i = 1; i < copies; ++i) out = tensor(out, base);
    return out;
  }
  fail("/kind", "unknown set kind '" + kind + "'");
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw precondition_error("cannot open " + path);
  Json doc = Json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw precondition_error("malformed JSON in " + path);
  return doc;
}

void save_text(const std::string& text, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw precondition_error("cannot write " + path);
  out << text;
}

std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) out << ',';
      if (needs_quotes(fields[i])) {
        out << '"';
        for (char c : fields[i]) {
          out << c;
          if (c == '"') out << '"';
        }
        out << '"';
      } else {
        out << fields[i];
      }
    }
    out << "\r\n";
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return out.str();
}

}  // namespace qsd
