#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <map>
#include <sstream>

#include "medpoc/ordered_data.hpp"

namespace medpoc::cli {

ojson number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

std::string percent(std::optional<double> v) {
  if (!v) return "undefined";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f%%", *v * 100.0);
  return buf;
}

namespace {

ojson bound_json(const std::optional<OrderedValue>& b) {
  if (!b) return nullptr;
  return b->value();
}

ojson interval_json(const Interval& i) {
  ojson j;
  j["lower"] = bound_json(i.lower());
  j["upper"] = bound_json(i.upper());
  j["upper_closed"] = i.upper_closed();
  return j;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

std::string text_of(const ojson& v) {
  if (v.is_null()) return "-";
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string bound_text(const ojson& v, bool lower) {
  if (v.is_null()) return lower ? "-inf" : "+inf";
  return format_number(v.get<double>());
}

std::string interval_text(const ojson& j) {
  return "[" + bound_text(j["lower"], true) + ", " + bound_text(j["upper"], false) +
         (j["upper_closed"].get<bool>() ? "]" : ")");
}

}  // namespace

ojson query_json(const Target& t) {
  const Query& q = t.query;
  ojson j;
  j["family"] = family_name(t.family);
  j["x_base"] = q.x_base.value();
  j["x_alt"] = q.x_alt.value();
  j["y"] = number_or_null(q.y_threshold.value());
  j["m"] = q.m_fixed ? ojson(q.m_fixed->value()) : ojson(nullptr);
  j["stratum"] = q.stratum;
  if (q.evidence) {
    const Evidence& e = *q.evidence;
    ojson ev;
    ev["kind"] = evidence_kind_name(e.kind());
    ev["x_star"] = e.x_star().value();
    ev["m_star"] = e.m_star() ? ojson(e.m_star()->value()) : ojson(nullptr);
    ev["y_interval"] = interval_json(e.y_interval());
    ev["m_interval"] = e.m_interval() ? interval_json(*e.m_interval()) : ojson(nullptr);
    j["evidence"] = ev;
  } else {
    j["evidence"] = nullptr;
  }
  return j;
}

ojson terms_json(const EvidenceTerms& e) {
  ojson j;
  j["a"] = e.a;
  j["b"] = e.b;
  j["rho"] = e.rho;
  j["l"] = e.l;
  j["u"] = e.u;
  j["gamma_T"] = e.gamma_t;
  j["gamma_D"] = e.gamma_d;
  j["gamma_I"] = e.gamma_i;
  j["delta"] = e.delta;
  j["alpha"] = e.alpha;
  j["beta"] = e.beta;
  return j;
}

ojson estimate_block(const Target& t, const Estimate& point, const BootstrapResult* boot) {
  ojson b;
  b["query"] = query_json(t);
  b["case"] = case_flag_name(point.case_flag);
  ojson values = ojson::array();
  for (std::size_t i = 0; i < point.values.size(); ++i) {
    const auto& nv = point.values[i];
    ojson v;
    v["name"] = nv.name;
    v["case"] = case_flag_name(point.case_flag);
    v["estimate"] = number_or_null(nv.value);
    if (boot) {
      const CiResult& ci = boot->intervals.at(i);
      v["ci_lower"] = number_or_null(ci.lower);
      v["ci_upper"] = number_or_null(ci.upper);
      v["bootstrap_mean"] = number_or_null(ci.mean);
      v["defined_replicates"] = ci.defined;
    }
    values.push_back(v);
  }
  b["values"] = values;
  b["terms"] = point.terms ? terms_json(*point.terms) : ojson(nullptr);
  b["warnings"] = point.warnings;
  if (boot) {
    b["bootstrap"] = {{"replicates", boot->replicates},
                      {"degenerate_replicates", boot->degenerate_count}};
  } else {
    b["bootstrap"] = nullptr;
  }
  return b;
}

ojson error_block(const std::string& kind, const std::string& message) {
  ojson e;
  e["kind"] = kind;
  e["message"] = message;
  return e;
}

std::string render_estimate_table(const ojson& r) {
  std::ostringstream os;
  os << "medpoc " << r["version"].get<std::string>() << "  seed " << r["seed"].get<std::uint64_t>();
  if (!r["input"].is_null()) os << "  input " << r["input"].get<std::string>();
  if (r.contains("rows")) os << "  rows " << r["rows"].get<std::size_t>();
  os << "\n";
  if (r.contains("error") && !r["error"].is_null()) {
    os << "error (" << r["error"]["kind"].get<std::string>()
       << "): " << r["error"]["message"].get<std::string>() << "\n";
    return os.str();
  }
  const double level = r["bootstrap"].is_null() ? 0.0 : r["bootstrap"]["level"].get<double>();
  std::size_t qi = 0;
  for (const auto& b : r["queries"]) {
    const auto& q = b["query"];
    os << "\nquery " << ++qi << ": " << q["family"].get<std::string>() << ", x'="
       << text_of(q["x_base"]) << " -> x=" << text_of(q["x_alt"]) << ", y=" << text_of(q["y"]);
    if (!q["m"].is_null()) os << ", m=" << text_of(q["m"]);
    if (!q["stratum"].empty()) {
      os << ", stratum=";
      for (std::size_t i = 0; i < q["stratum"].size(); ++i) {
        os << (i ? "," : "") << text_of(q["stratum"][i]);
      }
    }
    os << "\n";
    if (!q["evidence"].is_null()) {
      const auto& e = q["evidence"];
      os << "  evidence " << e["kind"].get<std::string>() << ": x*=" << text_of(e["x_star"]);
      if (!e["m_star"].is_null()) os << ", m*=" << text_of(e["m_star"]);
      if (!e["m_interval"].is_null()) os << ", M in " << interval_text(e["m_interval"]);
      os << ", Y in " << interval_text(e["y_interval"]) << "\n";
    }
    os << "  case: " << b["case"].get<std::string>() << "\n";
    const bool ci = !b["bootstrap"].is_null();
    os << "  " << pad("quantity", 10) << pad("estimate", 12);
    if (ci) os << fixed(level * 100.0, 0) << "% CI";
    os << "\n";
    for (const auto& v : b["values"]) {
      auto opt = [](const ojson& x) {
        return x.is_null() ? std::optional<double>() : std::optional<double>(x.get<double>());
      };
      os << "  " << pad(v["name"].get<std::string>(), 10) << pad(percent(opt(v["estimate"])), 12);
      if (ci) {
        if (v["ci_lower"].is_null()) {
          os << "undefined";
        } else {
          os << "[" << percent(opt(v["ci_lower"])) << ", " << percent(opt(v["ci_upper"])) << "]";
        }
      }
      os << "\n";
    }
    if (ci) {
      os << "  bootstrap: " << b["bootstrap"]["replicates"].get<std::size_t>() << " replicates, "
         << b["bootstrap"]["degenerate_replicates"].get<std::size_t>() << " degenerate\n";
    }
    for (const auto& w : b["warnings"]) os << "  warning: " << w.get<std::string>() << "\n";
  }
  return os.str();
}

std::string render_verify_table(const ojson& r) {
  std::ostringstream os;
  os << "medpoc " << r["version"].get<std::string>() << " verify  seed "
     << r["seed"].get<std::uint64_t>() << (r["quick"].get<bool>() ? "  (quick)" : "") << "\n\n";
  os << pad("N", 8) << pad("quantity", 10) << pad("exact", 11) << pad("estimate", 11)
     << pad("95% CI", 24) << pad("tol", 8) << "status\n";
  for (const auto& p : r["protocol"]) {
    std::string ci = p["lower"].is_null()
                         ? "-"
                         : "[" + fixed(p["lower"].get<double>(), 6) + ", " +
                               fixed(p["upper"].get<double>(), 6) + "]";
    os << pad(std::to_string(p["n"].get<std::size_t>()), 8)
       << pad(p["quantity"].get<std::string>(), 10) << pad(fixed(p["truth"].get<double>(), 6), 11)
       << pad(p["estimate"].is_null() ? "-" : fixed(p["estimate"].get<double>(), 6), 11)
       << pad(ci, 24)
       << pad(p["tolerance"].is_null() ? "-" : format_number(p["tolerance"].get<double>()), 8)
       << p["status"].get<std::string>() << "\n";
  }
  os << "\n";
  for (const auto& c : r["criteria"]) os << c["line"].get<std::string>() << "\n";
  os << "\n" << (r["passed"].get<bool>() ? "verify: all rows passed" : "verify: FAILED") << "\n";
  return os.str();
}

std::string render_sweep_csv(const ojson& r) {
  std::ostringstream os;
  os << "param,point,quantity,value,case,status\n";
  for (const auto& row : r["rows"]) {
    std::string status = row["status"].get<std::string>();
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    os << r["param"].get<std::string>() << "," << format_number(row["point"].get<double>()) << ","
       << row["quantity"].get<std::string>() << ","
       << (row["value"].is_null() ? "" : format_number(row["value"].get<double>())) << ","
       << row["case"].get<std::string>() << "," << status << "\n";
  }
  return os.str();
}

std::string render_sweep_table(const ojson& r) {
  std::ostringstream os;
  os << pad("point", 12) << pad("quantity", 10) << pad("value", 12) << pad("case", 15) << "status\n";
  for (const auto& row : r["rows"]) {
    os << pad(format_number(row["point"].get<double>()), 12)
       << pad(row["quantity"].get<std::string>(), 10)
       << pad(row["value"].is_null() ? "-" : percent(row["value"].get<double>()), 12)
       << pad(row["case"].get<std::string>(), 15) << row["status"].get<std::string>() << "\n";
  }
  return os.str();
}

std::string render_sweep_svg(const ojson& r) {
  // Series: the first three quantities in row order (T, ND, NI of the family).
  std::vector<std::string> names;
  for (const auto& row : r["rows"]) {
    const auto name = row["quantity"].get<std::string>();
    if (name.empty() || std::find(names.begin(), names.end(), name) != names.end()) continue;
    if (names.size() < 3) names.push_back(name);
  }
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  double xmin = INFINITY, xmax = -INFINITY, ymax = 0.0;
  for (const auto& row : r["rows"]) {
    const double x = row["point"].get<double>();
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    const auto name = row["quantity"].get<std::string>();
    if (row["value"].is_null() || std::find(names.begin(), names.end(), name) == names.end()) continue;
    const double y = row["value"].get<double>();
    series[name].push_back({x, y});
    ymax = std::max(ymax, y);
  }
  if (!(xmin < xmax)) {
    xmin = std::isfinite(xmin) ? xmin - 1.0 : 0.0;
    xmax = xmin + 2.0;
  }
  if (ymax <= 0.0) ymax = 1.0;
  ymax *= 1.05;

  const double w = 640, h = 400, left = 70, right = 150, top = 30, bottom = 50;
  const double pw = w - left - right, ph = h - top - bottom;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + ph - y / ymax * ph; };
  const char* dashes[3] = {"", "8,5", "2,4"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << " " << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
     << top + ph << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = ymax * i / 4.0;
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    os << "<text x=\"" << left - 8 << "\" y=\"" << fixed(sy(yv) + 4, 1)
       << "\" text-anchor=\"end\">" << fixed(yv, 3) << "</text>\n";
    os << "<text x=\"" << fixed(sx(xv), 1) << "\" y=\"" << top + ph + 18
       << "\" text-anchor=\"middle\">" << fixed(xv, 3) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\">"
     << r["param"].get<std::string>() << "</text>\n";
  for (std::size_t k = 0; k < names.size(); ++k) {
    auto pts = series[names[k]];
    std::sort(pts.begin(), pts.end());
    os << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"2\"";
    if (*dashes[k]) os << " stroke-dasharray=\"" << dashes[k] << "\"";
    os << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      os << (i ? " " : "") << fixed(sx(pts[i].first), 2) << "," << fixed(sy(pts[i].second), 2);
    }
    os << "\"/>\n";
    const double ly = top + 20 + 22.0 * static_cast<double>(k);
    os << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 55
       << "\" y2=\"" << ly << "\" stroke=\"black\" stroke-width=\"2\"";
    if (*dashes[k]) os << " stroke-dasharray=\"" << dashes[k] << "\"";
    os << "/>\n<text x=\"" << left + pw + 62 << "\" y=\"" << ly + 4 << "\">" << names[k]
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace medpoc::cli
