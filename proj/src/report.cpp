#include "crfeff/report.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>

namespace crfeff {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

}  // namespace

ReportEntry ReportEntry::residual(std::string suite, std::string condition, double value,
                                  double tol, Point worst) {
  ReportEntry e;
  e.suite = std::move(suite);
  e.condition = std::move(condition);
  e.value = value;
  e.threshold = tol;
  e.lower_bound = false;
  e.pass = value < tol;
  e.worst_point = std::move(worst);
  return e;
}

ReportEntry ReportEntry::bound(std::string suite, std::string condition, double value,
                               double threshold, Point worst) {
  ReportEntry e;
  e.suite = std::move(suite);
  e.condition = std::move(condition);
  e.value = value;
  e.threshold = threshold;
  e.lower_bound = true;
  e.pass = value > threshold;
  e.worst_point = std::move(worst);
  return e;
}

bool VerificationReport::overall_pass() const {
  for (const auto& e : entries)
    if (!e.pass) return false;
  return true;
}

std::string VerificationReport::to_ldjson() const {
  std::ostringstream os;
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["record"] = "entry";
    j["suite"] = e.suite;
    j["condition"] = e.condition;
    j["value"] = fmt(e.value);
    j["threshold"] = fmt(e.threshold);
    j["relation"] = e.lower_bound ? ">" : "<";
    j["pass"] = e.pass;
    nlohmann::ordered_json wp = nlohmann::ordered_json::array();
    for (double x : e.worst_point) wp.push_back(fmt(x));
    j["worst_point"] = wp;
    os << j.dump() << "\n";
  }
  nlohmann::ordered_json s;
  s["record"] = "summary";
  s["geometry"] = geometry;
  s["suite"] = suite_selection;
  s["seed"] = seed;
  s["points"] = points;
  s["order"] = order;
  s["rejections"] = rejections;
  s["entries"] = entries.size();
  s["overall_pass"] = overall_pass();
  os << s.dump() << "\n";
  return os.str();
}

VerificationReport VerificationReport::from_ldjson(const std::string& text) {
  VerificationReport rep;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    if (j.at("record") == "summary") {
      rep.geometry = j.at("geometry").get<std::string>();
      rep.suite_selection = j.at("suite").get<std::string>();
      rep.seed = j.at("seed").get<std::uint64_t>();
      rep.points = j.at("points").get<int>();
      rep.order = j.at("order").get<int>();
      rep.rejections = j.at("rejections").get<std::uint64_t>();
    } else {
      ReportEntry e;
      e.suite = j.at("suite").get<std::string>();
      e.condition = j.at("condition").get<std::string>();
      e.value = std::stod(j.at("value").get<std::string>());
      e.threshold = std::stod(j.at("threshold").get<std::string>());
      e.lower_bound = j.at("relation").get<std::string>() == ">";
      e.pass = j.at("pass").get<bool>();
      for (const auto& x : j.at("worst_point"))
        e.worst_point.push_back(std::stod(x.get<std::string>()));
      rep.entries.push_back(std::move(e));
    }
  }
  return rep;
}

std::string VerificationReport::to_table() const {
  std::ostringstream os;
  os << "geometry: " << geometry << "   suite: " << suite_selection << "   points: "
     << points << "   seed: " << seed;
  if (order > 0) os << "   order: " << order;
  if (rejections > 0) os << "   rejected samples: " << rejections;
  os << "\n";
  os << "  " << std::string(76, '-') << "\n";
  char buf[160];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "  %-13s %-35s %11.3e %s %9.1e  %s\n", e.suite.c_str(),
                  e.condition.c_str(), e.value, e.lower_bound ? ">" : "<", e.threshold,
                  e.pass ? "pass" : "FAIL");
    os << buf;
  }
  os << "  " << std::string(76, '-') << "\n";
  os << "  overall: " << (overall_pass() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

}  // namespace crfeff
