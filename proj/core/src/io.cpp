#include "obliq/io.hpp"

#include <cstdio>
#include <istream>
#include <sstream>

#include "obliq/error.hpp"

namespace obliq::io {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw FormatError(std::string("expected an object holding '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& j, const char* what) {
  if (!j.is_number()) throw FormatError(std::string(what) + ": expected a number");
  return j.get<double>();
}

std::size_t count(const json& j, const char* what) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw FormatError(std::string(what) + ": expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::uint64_t seed_of(const json& j) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw FormatError("seed: expected an unsigned 64-bit integer");
  return j.get<std::uint64_t>();
}

std::vector<double> numbers(const json& j, const char* what) {
  if (!j.is_array()) throw FormatError(std::string(what) + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(number(e, what));
  return out;
}

void append(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

json indices(const std::vector<std::size_t>& v) {
  json a = json::array();
  for (std::size_t k : v) a.push_back(k + 1);
  return a;
}

}  // namespace

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw FormatError("matrix: expected a nonempty array of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw FormatError("matrix: rows must be nonempty arrays");
  Matrix m(idx(j.size()), idx(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::vector<double> row = numbers(j[i], "matrix row");
    if (row.size() != cols) throw FormatError("matrix: ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m(idx(i), idx(c)) = row[c];
  }
  return m;
}

json vector_to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from_json(const json& j) {
  const std::vector<double> v = numbers(j, "vector");
  return Eigen::Map<const Vector>(v.data(), idx(v.size()));
}

CollisionParams params_from_json(const json& j) {
  if (j.is_object() && j.contains("symmetric")) return CollisionParams::symmetric(count(j["symmetric"], "symmetric"));
  return CollisionParams(vector_from_json(field(j, "qplus")), vector_from_json(field(j, "qminus")));
}

json params_to_json(const CollisionParams& q) {
  return {{"qplus", vector_to_json(q.qplus())}, {"qminus", vector_to_json(q.qminus())}};
}

RegularPath regular_path_from_json(const json& j) {
  std::vector<std::size_t> axes;
  const json& a = field(j, "axes");
  if (!a.is_array()) throw FormatError("axes: expected an array");
  for (const auto& e : a) {
    const std::size_t k = count(e, "axes");
    if (k == 0) throw FormatError("axes: indices are one-based");
    axes.push_back(k - 1);
  }
  return RegularPath(vector_from_json(field(j, "start")), numbers(field(j, "breakpoints"), "breakpoints"),
                     std::move(axes), numbers(field(j, "slopes"), "slopes"));
}

json regular_path_to_json(const RegularPath& p) {
  json axes = json::array();
  for (std::size_t a : p.axes()) axes.push_back(a + 1);
  return {{"start", vector_to_json(p.start())},
          {"breakpoints", p.breakpoints()},
          {"axes", axes},
          {"slopes", p.slopes()}};
}

BrownianSpec brownian_from_json(const json& j) {
  BrownianSpec s;
  s.drift = vector_from_json(field(j, "drift"));
  s.dim = j.contains("dim") ? count(j["dim"], "dim") : static_cast<std::size_t>(s.drift.size());
  s.covariance = matrix_from_json(field(j, "covariance"));
  s.horizon = number(field(j, "horizon"), "horizon");
  s.steps = count(field(j, "steps"), "steps");
  s.seed = j.contains("seed") ? seed_of(j["seed"]) : 0;
  return s;
}

json brownian_to_json(const BrownianSpec& s) {
  return {{"dim", s.dim},           {"drift", vector_to_json(s.drift)}, {"covariance", matrix_to_json(s.covariance)},
          {"horizon", s.horizon},   {"steps", s.steps},                 {"seed", s.seed}};
}

CbpSpec cbp_from_json(const json& j) {
  CbpSpec s;
  s.g = vector_from_json(field(j, "g"));
  s.sigma2 = vector_from_json(field(j, "sigma2"));
  s.q = params_from_json(field(j, "q"));
  s.y0 = vector_from_json(field(j, "y0"));
  s.horizon = number(field(j, "horizon"), "horizon");
  s.steps = count(field(j, "steps"), "steps");
  s.seed = j.contains("seed") ? seed_of(j["seed"]) : 0;
  if (j.contains("zero_noise")) {
    if (!j["zero_noise"].is_boolean()) throw FormatError("zero_noise: expected a boolean");
    s.zero_noise = j["zero_noise"].get<bool>();
  }
  validate_cbp_spec(s);
  return s;
}

json cbp_to_json(const CbpSpec& s) {
  return {{"g", vector_to_json(s.g)},   {"sigma2", vector_to_json(s.sigma2)}, {"q", params_to_json(s.q)},
          {"y0", vector_to_json(s.y0)}, {"horizon", s.horizon},               {"steps", s.steps},
          {"seed", s.seed},             {"zero_noise", s.zero_noise}};
}

std::string path_csv(const SampledPath& p, const std::string& prefix) {
  std::string out = "t";
  for (std::size_t c = 0; c < p.dim(); ++c) out += "," + prefix + std::to_string(c + 1);
  out += '\n';
  for (std::size_t k = 0; k < p.size(); ++k) {
    append(out, p.times()[k]);
    for (std::size_t c = 0; c < p.dim(); ++c) {
      out += ',';
      append(out, p.value(k, c));
    }
    out += '\n';
  }
  return out;
}

SampledPath path_from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("path CSV: empty input");
  std::size_t cols = 1;
  for (char ch : line) cols += ch == ',';
  if (line.rfind("t,", 0) != 0 || cols < 2) throw FormatError("path CSV: header must be t,x1,...,xd");
  std::vector<double> times;
  std::vector<double> vals;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw FormatError("path CSV: bad number on line " + std::to_string(lineno));
      }
      (c == 0 ? times : vals).push_back(v);
      ++c;
    }
    if (c != cols) throw FormatError("path CSV: wrong column count on line " + std::to_string(lineno));
  }
  Matrix m = Eigen::Map<const Matrix>(vals.data(), idx(cols - 1), idx(times.size()));
  return SampledPath(std::move(times), std::move(m));
}

std::string skorokhod_csv(const SkorokhodSolution& s) {
  const std::size_t d = s.dim();
  std::string out = "t";
  for (std::size_t c = 0; c < d; ++c) out += ",z" + std::to_string(c + 1);
  for (std::size_t c = 0; c < d; ++c) out += ",l" + std::to_string(c + 1);
  out += '\n';
  for (std::size_t k = 0; k < s.z.size(); ++k) {
    append(out, s.z.times()[k]);
    for (const SampledPath* p : {&s.z, &s.l})
      for (std::size_t c = 0; c < d; ++c) {
        out += ',';
        append(out, p->value(k, c));
      }
    out += '\n';
  }
  return out;
}

std::string particles_csv(const ParticleSystemSolution& s) {
  const std::size_t n = s.size();
  std::string out = "t";
  for (std::size_t c = 0; c < n; ++c) out += ",y" + std::to_string(c + 1);
  for (std::size_t c = 1; c < n; ++c) out += ",l" + std::to_string(c) + std::to_string(c + 1);
  for (std::size_t c = 1; c < n; ++c) out += ",z" + std::to_string(c);
  out += '\n';
  for (std::size_t k = 0; k < s.y.size(); ++k) {
    append(out, s.y.times()[k]);
    for (const SampledPath* p : {&s.y, &s.l, &s.z})
      for (std::size_t c = 0; c < p->dim(); ++c) {
        out += ',';
        append(out, p->value(k, c));
      }
    out += '\n';
  }
  return out;
}

json events_to_json(const std::vector<BoundaryEvent>& events) {
  json a = json::array();
  for (const auto& e : events)
    a.push_back({{"tau", e.tau}, {"active_before", indices(e.active_before)}, {"active_after", indices(e.active_after)}});
  return a;
}

json report_to_json(const ComparisonReport& r) {
  return {{"passed", r.passed},
          {"max_violation", r.max_violation},
          {"location", {{"t", r.location.t}, {"component", r.location.component + 1}, {"relation", r.location.relation}}},
          {"tol", r.tol},
          {"seed", r.seed}};
}

json suite_to_json(const SuiteResult& s) {
  json inst = json::array();
  for (const auto& i : s.instances) {
    json r = report_to_json(i.report);
    r["index"] = i.index;
    if (!i.error.empty()) r["error"] = {{"kind", i.error_kind}, {"message", i.error}};
    inst.push_back(std::move(r));
  }
  return {{"suite", s.name},         {"passed", s.passed()}, {"instances", s.instances.size()},
          {"failures", s.failures},  {"errors", s.errors},   {"max_violation", s.max_violation},
          {"reports", std::move(inst)}};
}

}  // namespace obliq::io
