#include "torsionlab/io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "torsionlab/errors.hpp"

namespace tl::io {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail(ErrorKind::Parse, (where.empty() ? std::string("/") : where) + ": " + what);
}

std::string at(const std::string& where, const std::string& key) { return where + "/" + key; }
std::string at(const std::string& where, std::size_t i) { return where + "/" + std::to_string(i); }

const Json& field(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad(where, "missing field \"" + key + "\"");
  return *it;
}

void check_kind(const Json& j, const std::string& want, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  auto it = j.find("kind");
  if (it == j.end()) return;
  if (!it->is_string() || it->get<std::string>() != want)
    bad(at(where, "kind"), "expected kind \"" + want + "\", got " + it->dump());
}

double real_of(const Json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

long long integer_of(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) bad(where, "expected an integer");
  return j.get<long long>();
}

cplx entry(const Json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  bad(where, "expected a number or [re, im]");
}

Mat matrix(const Json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array of rows");
  std::size_t cols = 0;
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array()) bad(at(where, r), "expected a row array");
    if (r == 0) cols = j[r].size();
    if (j[r].size() != cols) bad(at(where, r), "row length differs from row 0");
  }
  Mat m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = entry(j[r][c], at(at(where, r), c));
  return m;
}

Algebra algebra_of(const Json& j, const std::string& where) {
  auto it = j.find("algebra");
  if (it == j.end()) return j.contains("matrix") ? Algebra::Scalar : Algebra::CircleFibered;
  if (!it->is_string()) bad(at(where, "algebra"), "expected a string");
  std::string a = it->get<std::string>();
  if (a == "scalar") return Algebra::Scalar;
  if (a == "circle_fibered" || a == "circle") return Algebra::CircleFibered;
  bad(at(where, "algebra"), "unknown algebra \"" + a + "\"");
}

std::vector<Operator> operator_list(const Json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array of operators");
  std::vector<Operator> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_operator(j[i], at(where, i)));
  return out;
}

template <class F>
auto rethrow_as_parse(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) throw;
    bad(where, e.what());
  }
}

Json json_entry(cplx z) {
  if (z.imag() == 0.0) return z.real();
  return Json::array({z.real(), z.imag()});
}

Json json_matrix(const Mat& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(json_entry(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Json parse_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Recover line and column from the byte offset.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorKind::Parse, source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
}

Json load_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Parse, path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

Operator read_operator(const Json& j, const std::string& where) {
  check_kind(j, "operator", where);
  Algebra a = algebra_of(j, where);
  if (a == Algebra::Scalar || j.contains("matrix")) {
    Mat m = matrix(field(j, "matrix", where), at(where, "matrix"));
    // Shapes with a zero side need explicit rows/cols.
    if (j.contains("rows") || j.contains("cols")) {
      Index r = j.contains("rows") ? static_cast<Index>(integer_of(j["rows"], at(where, "rows"))) : m.rows();
      Index c = j.contains("cols") ? static_cast<Index>(integer_of(j["cols"], at(where, "cols"))) : m.cols();
      if (r < 0 || c < 0) bad(where, "negative shape");
      if (m.size() == 0)
        m = Mat::Zero(r, c);
      else if (m.rows() != r || m.cols() != c)
        bad(at(where, "matrix"), "shape differs from rows/cols");
    }
    return a == Algebra::Scalar ? Operator::scalar(std::move(m)) : Operator::constant(a, std::move(m));
  }
  if (j.contains("samples")) {
    const Json& s = j["samples"];
    std::string w = at(where, "samples");
    if (!s.is_array() || s.empty()) bad(w, "expected a non-empty array of fiber matrices");
    std::vector<Mat> fibers;
    for (std::size_t i = 0; i < s.size(); ++i) {
      fibers.push_back(matrix(s[i], at(w, i)));
      if (fibers.back().rows() != fibers[0].rows() || fibers.back().cols() != fibers[0].cols())
        bad(at(w, i), "fiber shape differs from fiber 0");
    }
    Index r = fibers[0].rows(), c = fibers[0].cols();
    return rethrow_as_parse(where, [&] { return Operator::sampled(r, c, std::move(fibers)); });
  }
  const Json& terms = field(j, "trig_poly", where);
  std::string w = at(where, "trig_poly");
  if (!terms.is_array() || terms.empty()) bad(w, "expected a non-empty array of terms");
  std::map<int, Mat> coeffs;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    std::string wi = at(w, i);
    int n = static_cast<int>(integer_of(field(terms[i], "n", wi), at(wi, "n")));
    Mat c = matrix(field(terms[i], "c", wi), at(wi, "c"));
    if (coeffs.count(n)) bad(at(wi, "n"), "duplicate frequency " + std::to_string(n));
    coeffs[n] = std::move(c);
  }
  Index rows = coeffs.begin()->second.rows(), cols = coeffs.begin()->second.cols();
  if (j.contains("rows")) rows = static_cast<Index>(integer_of(j["rows"], at(where, "rows")));
  if (j.contains("cols")) cols = static_cast<Index>(integer_of(j["cols"], at(where, "cols")));
  for (const auto& [n, c] : coeffs)
    if (c.rows() != rows || c.cols() != cols)
      bad(w, "coefficient of frequency " + std::to_string(n) + " is not " + std::to_string(rows) + "x" +
                 std::to_string(cols));
  return Operator::trig_poly(rows, cols, std::move(coeffs));
}

HilbertComplex read_complex(const Json& j, const std::string& where) {
  check_kind(j, "complex", where);
  const Json& mods = j.contains("modules") ? j["modules"] : field(j, "dims", where);
  std::string wm = at(where, j.contains("modules") ? "modules" : "dims");
  if (!mods.is_array() || mods.empty()) bad(wm, "expected a non-empty array of multiplicities");
  std::vector<Index> dims;
  for (std::size_t i = 0; i < mods.size(); ++i) {
    long long k = integer_of(mods[i], at(wm, i));
    if (k < 0) bad(at(wm, i), "negative multiplicity");
    dims.push_back(static_cast<Index>(k));
  }
  std::vector<Operator> diffs;
  if (j.contains("differentials")) diffs = operator_list(j["differentials"], at(where, "differentials"));
  Algebra a = j.contains("algebra") ? algebra_of(j, where) : (diffs.empty() ? Algebra::Scalar : diffs[0].algebra());
  for (auto& d : diffs) d = promote(d, a);
  if (diffs.size() + 1 != dims.size())
    bad(at(where, "differentials"), "expected " + std::to_string(dims.size() - 1) + " differentials, got " +
                                        std::to_string(diffs.size()));
  return rethrow_as_parse(where, [&] { return HilbertComplex(a, dims, diffs); });
}

ComplexMorphism read_morphism(const Json& j, const std::string& where) {
  check_kind(j, "morphism", where);
  HilbertComplex s = read_complex(field(j, "source", where), at(where, "source"));
  HilbertComplex t = read_complex(field(j, "target", where), at(where, "target"));
  std::string key = j.contains("components") ? "components" : "maps";
  std::vector<Operator> f = operator_list(field(j, key, where), at(where, key));
  for (auto& op : f) op = promote(op, s.algebra());
  return rethrow_as_parse(where, [&] { return make_morphism(s, t, f); });
}

MorseDatum read_morse(const Json& j, const std::string& where) {
  check_kind(j, "morse", where);
  MorseDatum m;
  if (j.contains("dimension")) m.dimension = static_cast<int>(integer_of(j["dimension"], at(where, "dimension")));
  const Json& pts = field(j, "points", where);
  std::string wp = at(where, "points");
  if (!pts.is_array() || pts.empty()) bad(wp, "expected a non-empty array of critical points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::string w = at(wp, i);
    CriticalPoint p;
    const Json& id = field(pts[i], "id", w);
    if (!id.is_string()) bad(at(w, "id"), "expected a string");
    p.id = id.get<std::string>();
    p.index = static_cast<int>(integer_of(field(pts[i], "index", w), at(w, "index")));
    if (pts[i].contains("h")) p.value = real_of(pts[i]["h"], at(w, "h"));
    if (pts[i].contains("position")) p.position = real_of(pts[i]["position"], at(w, "position"));
    m.points.push_back(p);
  }
  if (j.contains("incidence")) {
    const Json& inc = j["incidence"];
    std::string wi = at(where, "incidence");
    if (!inc.is_array()) bad(wi, "expected an array");
    for (std::size_t i = 0; i < inc.size(); ++i) {
      std::string w = at(wi, i);
      Incidence e;
      const Json& from = field(inc[i], "from", w);
      const Json& to = field(inc[i], "to", w);
      if (!from.is_string()) bad(at(w, "from"), "expected a string");
      if (!to.is_string()) bad(at(w, "to"), "expected a string");
      e.from = from.get<std::string>();
      e.to = to.get<std::string>();
      if (inc[i].contains("word")) {
        if (!inc[i]["word"].is_string()) bad(at(w, "word"), "expected a string");
        e.word = rethrow_as_parse(at(w, "word"), [&] { return parse_word(inc[i]["word"].get<std::string>()); });
      }
      if (inc[i].contains("coeff")) e.coeff = static_cast<int>(integer_of(inc[i]["coeff"], at(w, "coeff")));
      m.incidences.push_back(e);
    }
  } else {
    // Circle triangulation: incidences follow from the positions.
    std::vector<std::pair<double, int>> pos;
    for (std::size_t i = 0; i < m.points.size(); ++i) {
      if (std::isnan(m.points[i].position))
        bad(at(at(wp, i), "position"), "needed when the file has no \"incidence\" list");
      pos.emplace_back(m.points[i].position, m.points[i].index);
    }
    std::string gen = "g";
    if (j.contains("generator")) {
      if (!j["generator"].is_string()) bad(at(where, "generator"), "expected a string");
      gen = j["generator"].get<std::string>();
    }
    MorseDatum tri = rethrow_as_parse(where, [&] { return circle_triangulation(pos, gen); });
    // Keep the file's ids and values.
    std::map<std::string, std::string> rename;
    for (auto& p : tri.points)
      for (const auto& q : m.points)
        if (p.position == q.position && p.index == q.index) {
          rename[p.id] = q.id;
          p.id = q.id;
          p.value = q.value;
        }
    for (auto& e : tri.incidences) {
      e.from = rename[e.from];
      e.to = rename[e.to];
    }
    return tri;
  }
  rethrow_as_parse(where, [&] {
    validate(m);
    return 0;
  });
  return m;
}

Representation read_representation(const Json& j, const std::string& where) {
  check_kind(j, "representation", where);
  const Json& gens = field(j, "generators", where);
  std::string wg = at(where, "generators");
  if (!gens.is_object() || gens.empty()) bad(wg, "expected an object mapping generator names to operators");
  Representation rho;
  bool first = true;
  for (const auto& [name, payload] : gens.items()) {
    Operator op = read_operator(payload, at(wg, name));
    if (!op.is_square()) bad(at(wg, name), "generator must be square");
    if (first) {
      rho.algebra = op.algebra();
      rho.dim = op.rows();
      first = false;
    } else if (op.algebra() != rho.algebra || op.rows() != rho.dim) {
      bad(at(wg, name), "generators must share algebra and size");
    }
    rho.generators[name] = op;
  }
  return rho;
}

HermitianStructure read_structure(const Json& j, const Operator& holonomy_in, const std::string& where) {
  check_kind(j, "structure", where);
  Operator holonomy = j.contains("holonomy") ? read_operator(j["holonomy"], at(where, "holonomy")) : holonomy_in;
  if (holonomy.rows() == 0) bad(where, "no holonomy given");
  std::string type = j.contains("t") ? "sampled" : "identity";
  if (j.contains("type")) {
    if (!j["type"].is_string()) bad(at(where, "type"), "expected a string");
    type = j["type"].get<std::string>();
  }
  return rethrow_as_parse(where, [&]() -> HermitianStructure {
    if (type == "identity") return identity_structure(holonomy);
    if (type == "canonical") {
      double t1 = j.contains("t1") ? real_of(j["t1"], at(where, "t1")) : 0.25;
      double t2 = j.contains("t2") ? real_of(j["t2"], at(where, "t2")) : 0.75;
      double eps = j.contains("eps") ? real_of(j["eps"], at(where, "eps")) : 0.05;
      return canonical_structure(holonomy, t1, t2, eps);
    }
    if (type == "conformal") {
      HermitianStructure base = read_structure(field(j, "base", where), holonomy, at(where, "base"));
      const Json& phi = field(j, "phi", where);
      std::string wp = at(where, "phi");
      double c0 = phi.contains("constant") ? real_of(phi["constant"], at(wp, "constant")) : 0.0;
      std::vector<double> ca, sa;
      for (const char* key : {"cos", "sin"}) {
        if (!phi.contains(key)) continue;
        auto& dst = std::string(key) == "cos" ? ca : sa;
        if (!phi[key].is_array()) bad(at(wp, key), "expected an array");
        for (std::size_t i = 0; i < phi[key].size(); ++i) dst.push_back(real_of(phi[key][i], at(at(wp, key), i)));
      }
      auto f = [c0, ca, sa](double s) {
        double v = c0;
        for (std::size_t k = 0; k < ca.size(); ++k) v += ca[k] * std::cos(2.0 * std::numbers::pi * (k + 1) * s);
        for (std::size_t k = 0; k < sa.size(); ++k) v += sa[k] * std::sin(2.0 * std::numbers::pi * (k + 1) * s);
        return v;
      };
      return conformal_structure(base, f);
    }
    if (type == "sampled") {
      const Json& t = field(j, "t", where);
      const Json& mu = field(j, "mu", where);
      if (!t.is_array() || !mu.is_array() || t.size() != mu.size() || t.empty())
        bad(where, "\"t\" and \"mu\" must be non-empty arrays of equal length");
      std::vector<double> ts;
      std::vector<Operator> ms;
      for (std::size_t i = 0; i < t.size(); ++i) {
        ts.push_back(real_of(t[i], at(at(where, "t"), i)));
        std::string wm = at(at(where, "mu"), i);
        Operator op = mu[i].is_object() ? read_operator(mu[i], wm) : Operator::scalar(matrix(mu[i], wm));
        ms.push_back(promote(op, holonomy.algebra()));
      }
      return sampled_structure(holonomy, ts, ms);
    }
    bad(at(where, "type"), "unknown structure type \"" + type + "\"");
  });
}

CoupledInput read_coupled(const Json& j, const std::string& where) {
  check_kind(j, "coupled", where);
  CoupledInput in;
  in.c1 = read_complex(field(j, "c1", where), at(where, "c1"));
  in.c2 = read_complex(field(j, "c2", where), at(where, "c2"));
  in.coupling = operator_list(field(j, "coupling", where), at(where, "coupling"));
  for (auto& op : in.coupling) op = promote(op, in.c1.algebra());
  return in;
}

std::pair<ComplexMorphism, ComplexMorphism> read_composition(const Json& j, const std::string& where) {
  check_kind(j, "composition", where);
  return {read_morphism(field(j, "f1", where), at(where, "f1")),
          read_morphism(field(j, "f2", where), at(where, "f2"))};
}

ShortExactSequence read_sequence(const Json& j, const std::string& where) {
  check_kind(j, "sequence", where);
  ShortExactSequence s;
  s.sub = read_complex(field(j, "sub", where), at(where, "sub"));
  s.middle = read_complex(field(j, "middle", where), at(where, "middle"));
  s.quotient = read_complex(field(j, "quotient", where), at(where, "quotient"));
  s.inclusion = operator_list(field(j, "inclusion", where), at(where, "inclusion"));
  s.projection = operator_list(field(j, "projection", where), at(where, "projection"));
  return s;
}

std::pair<std::vector<double>, std::vector<double>> read_samples_csv(const std::string& text,
                                                                   const std::string& source) {
  std::vector<double> t, g;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    auto comma = line.find(',');
    auto where = source + ":" + std::to_string(lineno);
    if (comma == std::string::npos) fail(ErrorKind::Parse, where + ": expected \"t,value\"");
    try {
      std::size_t p1 = 0, p2 = 0;
      std::string a = line.substr(0, comma), b = line.substr(comma + 1);
      double x = std::stod(a, &p1), y = std::stod(b, &p2);
      if (a.find_first_not_of(" \t", p1) != std::string::npos || b.find_first_not_of(" \t", p2) != std::string::npos)
        throw std::invalid_argument("trailing text");
      t.push_back(x);
      g.push_back(y);
    } catch (const std::logic_error&) {
      if (t.empty() && lineno == 1) continue;  // header
      fail(ErrorKind::Parse, where + ": expected two numbers");
    }
  }
  require(!t.empty(), ErrorKind::Parse, source + ": no samples");
  return {t, g};
}

Json write_operator(const Operator& op) {
  Json j;
  j["kind"] = "operator";
  j["algebra"] = algebra_name(op.algebra());
  switch (op.payload()) {
    case Operator::Payload::Matrix:
      j["rows"] = op.rows();
      j["cols"] = op.cols();
      j["matrix"] = json_matrix(op.matrix());
      break;
    case Operator::Payload::TrigPoly: {
      j["rows"] = op.rows();
      j["cols"] = op.cols();
      Json terms = Json::array();
      for (const auto& [n, c] : op.terms()) terms.push_back({{"n", n}, {"c", json_matrix(c)}});
      j["trig_poly"] = std::move(terms);
      break;
    }
    case Operator::Payload::Sampled: {
      Json s = Json::array();
      for (const auto& m : op.samples()) s.push_back(json_matrix(m));
      j["samples"] = std::move(s);
      break;
    }
  }
  return j;
}

Json write_complex(const HilbertComplex& c) {
  Json j;
  j["kind"] = "complex";
  j["algebra"] = algebra_name(c.algebra());
  j["modules"] = c.dims();
  Json d = Json::array();
  for (const auto& op : c.differentials()) d.push_back(write_operator(op));
  j["differentials"] = std::move(d);
  return j;
}

Json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

}  // namespace tl::io
