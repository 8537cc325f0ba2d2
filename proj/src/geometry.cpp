#include "crfeff/geometry.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace crfeff {

bool CRGeometry::admissible(const Point& p) const {
  if (!chart.domain) return true;
  try {
    Jet v = eval_expr(chart.domain, chart, lets, p, 1);
    return v.value().real() > 0.0;
  } catch (const SingularPoint&) {
    return false;
  }
}

Jet CRGeometry::eval_scalar(const ExprPtr& e, const Point& p, int order) const {
  return eval_expr(e, chart, lets, p, order);
}

std::vector<Jet> CRGeometry::eval_one_form(const ExprPtr& e, const Point& p,
                                           int order) const {
  DiffValue v = eval_diff_expr(e, chart, lets, p, order);
  if (!v.is_form()) throw std::runtime_error("expected a one-form expression");
  if (v.scalar.max_abs() > 0.0)
    throw std::runtime_error("one-form expression has a scalar part");
  return v.form;
}

namespace {

OneFormFieldFn make_form_field(Chart chart, LetTable lets, ExprPtr e) {
  return [chart = std::move(chart), lets = std::move(lets), e](const Point& p, int order) {
    DiffValue v = eval_diff_expr(e, chart, lets, p, order);
    if (!v.is_form()) throw std::runtime_error("expected a one-form expression");
    if (v.scalar.max_abs() > 0.0)
      throw std::runtime_error("one-form expression has a scalar part");
    return v.form;
  };
}

ScalarFieldFn make_scalar_field(Chart chart, LetTable lets, ExprPtr e) {
  return [chart = std::move(chart), lets = std::move(lets), e](const Point& p, int order) {
    return eval_expr(e, chart, lets, p, order);
  };
}

}  // namespace

void bind_expression_fields(CRGeometry& g) {
  if (g.theta_expr) g.theta = make_form_field(g.chart, g.lets, g.theta_expr);
  g.theta_alpha.clear();
  for (const auto& e : g.theta_alpha_expr)
    g.theta_alpha.push_back(make_form_field(g.chart, g.lets, e));
}

CRData bind_cr_data(const CRGeometry& g) {
  CRData data;
  for (const auto& [key, e] : g.perturbation.xi_alpha)
    data.xi_alpha[key] = make_scalar_field(g.chart, g.lets, e);
  for (const auto& [k, e] : g.perturbation.xi_zero)
    data.xi_zero[k] = make_scalar_field(g.chart, g.lets, e);
  return data;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

struct FileError : std::runtime_error {
  FileError(const std::string& msg, int line)
      : std::runtime_error("geometry file, line " + std::to_string(line) + ": " + msg) {}
};

}  // namespace

CRGeometry load_geometry(const std::string& text) {
  CRGeometry g;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int lineno = 0;

  auto parse_kv = [&](const std::string& l) -> std::pair<std::string, std::string> {
    size_t eq = l.find('=');
    if (eq == std::string::npos) throw FileError("expected 'key = value'", lineno);
    return {trim(l.substr(0, eq)), trim(l.substr(eq + 1))};
  };

  while (std::getline(is, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw FileError("malformed section header", lineno);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    if (section == "chart") {
      auto [key, value] = parse_kv(line);
      if (key == "name") {
        g.name = value;
      } else if (key == "m") {
        g.m = std::stoi(value);
      } else if (key == "coords") {
        g.chart.coords = split_ws(value);
      } else if (key.rfind("complex ", 0) == 0) {
        std::string zname = trim(key.substr(8));
        auto parts = split_ws(value);
        if (parts.size() != 2) throw FileError("complex pairing needs two names", lineno);
        ComplexPair cp;
        cp.name = zname;
        cp.re = g.chart.coord_index(parts[0]);
        cp.im = g.chart.coord_index(parts[1]);
        if (cp.re < 0 || cp.im < 0) throw FileError("unknown coordinate in pairing", lineno);
        g.chart.complex_pairs.push_back(cp);
      } else if (key == "domain") {
        g.chart.domain = parse_expr(value);
      } else if (key.rfind("box ", 0) == 0) {
        std::string cname = trim(key.substr(4));
        int ci = g.chart.coord_index(cname);
        if (ci < 0) throw FileError("unknown coordinate in box", lineno);
        auto parts = split_ws(value);
        if (parts.size() != 2) throw FileError("box needs 'lo hi'", lineno);
        if (g.chart.box.empty()) g.chart.box.assign(g.chart.coords.size(), {-1.0, 1.0});
        g.chart.box[ci] = {std::stod(parts[0]), std::stod(parts[1])};
      } else {
        throw FileError("unknown chart key '" + key + "'", lineno);
      }
    } else if (section == "let") {
      auto [key, value] = parse_kv(line);
      g.lets[key] = parse_expr(value);
    } else if (section == "contact_form") {
      auto [key, value] = parse_kv(line);
      if (key != "theta") throw FileError("contact_form section takes 'theta = ...'", lineno);
      g.theta_expr = parse_expr(value);
    } else if (section == "coframe") {
      auto [key, value] = parse_kv(line);
      if (key.rfind("theta", 0) != 0) throw FileError("coframe keys are theta1..thetam", lineno);
      int idx = std::stoi(key.substr(5));
      if (static_cast<int>(g.theta_alpha_expr.size()) < idx) g.theta_alpha_expr.resize(idx);
      g.theta_alpha_expr[idx - 1] = parse_expr(value);
    } else if (section == "perturbation") {
      auto [key, value] = parse_kv(line);
      if (key == "alpha") {
        g.perturbation.alpha = std::stod(value);
      } else {
        // xi_<a>[<k>] with a in 1..m, or xi_0[<k>]
        size_t lb = key.find('[');
        size_t rb = key.find(']');
        if (key.rfind("xi_", 0) != 0 || lb == std::string::npos || rb == std::string::npos)
          throw FileError("perturbation keys are alpha, xi_<a>[k], xi_0[k]", lineno);
        int a = std::stoi(key.substr(3, lb - 3));
        int k = std::stoi(key.substr(lb + 1, rb - lb - 1));
        if (a == 0) {
          if (k < 0) throw FileError("xi_0[k] requires k >= 0 (negative k by conjugation)", lineno);
          g.perturbation.xi_zero[k] = parse_expr(value);
        } else {
          g.perturbation.xi_alpha[{a, k}] = parse_expr(value);
        }
      }
    } else if (section == "scales") {
      auto [key, value] = parse_kv(line);
      if (key == "vol_factor") {
        g.vol_factor = std::stod(value);
      } else if (key.rfind("sigma ", 0) == 0) {
        g.sigma_scales[trim(key.substr(6))] = parse_expr(value);
      } else if (key.rfind("scale ", 0) == 0) {
        g.cr_scales[trim(key.substr(6))] = parse_expr(value);
      } else {
        throw FileError("unknown scales key '" + key + "'", lineno);
      }
    } else if (section.empty()) {
      throw FileError("content before first section", lineno);
    } else {
      throw FileError("unknown section '" + section + "'", lineno);
    }
  }
  if (g.chart.coords.empty()) throw std::runtime_error("geometry file: missing [chart] coords");
  if (!g.theta_expr) throw std::runtime_error("geometry file: missing [contact_form]");
  if (static_cast<int>(g.theta_alpha_expr.size()) != g.m)
    throw std::runtime_error("geometry file: coframe size does not match m");
  for (const auto& e : g.theta_alpha_expr)
    if (!e) throw std::runtime_error("geometry file: missing coframe entry");
  if (g.chart.box.empty()) g.chart.box.assign(g.chart.coords.size(), {-1.0, 1.0});
  bind_expression_fields(g);
  return g;
}

CRGeometry load_geometry_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open geometry file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return load_geometry(ss.str());
}

std::string serialize_geometry(const CRGeometry& g) {
  std::ostringstream os;
  os << "[chart]\n";
  if (!g.name.empty()) os << "name = " << g.name << "\n";
  os << "m = " << g.m << "\n";
  os << "coords =";
  for (const auto& c : g.chart.coords) os << ' ' << c;
  os << "\n";
  for (const auto& p : g.chart.complex_pairs)
    os << "complex " << p.name << " = " << g.chart.coords[p.re] << ' '
       << g.chart.coords[p.im] << "\n";
  if (g.chart.domain) os << "domain = " << to_string(g.chart.domain) << "\n";
  for (size_t i = 0; i < g.chart.box.size(); ++i) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "box %s = %.17g %.17g", g.chart.coords[i].c_str(),
                  g.chart.box[i].first, g.chart.box[i].second);
    os << buf << "\n";
  }
  if (!g.lets.empty()) {
    os << "\n[let]\n";
    for (const auto& [k, e] : g.lets) os << k << " = " << to_string(e) << "\n";
  }
  os << "\n[contact_form]\ntheta = " << to_string(g.theta_expr) << "\n";
  os << "\n[coframe]\n";
  for (size_t i = 0; i < g.theta_alpha_expr.size(); ++i)
    os << "theta" << (i + 1) << " = " << to_string(g.theta_alpha_expr[i]) << "\n";
  if (!g.perturbation.empty() || g.perturbation.alpha != 1.0) {
    os << "\n[perturbation]\n";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", g.perturbation.alpha);
    os << "alpha = " << buf << "\n";
    for (const auto& [key, e] : g.perturbation.xi_alpha)
      os << "xi_" << key.first << "[" << key.second << "] = " << to_string(e) << "\n";
    for (const auto& [k, e] : g.perturbation.xi_zero)
      os << "xi_0[" << k << "] = " << to_string(e) << "\n";
  }
  os << "\n[scales]\n";
  {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", g.vol_factor);
    os << "vol_factor = " << buf << "\n";
  }
  for (const auto& [k, e] : g.sigma_scales) os << "sigma " << k << " = " << to_string(e) << "\n";
  for (const auto& [k, e] : g.cr_scales) os << "scale " << k << " = " << to_string(e) << "\n";
  return os.str();
}

}  // namespace crfeff
