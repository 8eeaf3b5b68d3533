#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "medpoc/errors.hpp"
#include "medpoc/oracle.hpp"
#include "medpoc/rng.hpp"
#include "medpoc/scm.hpp"
#include "medpoc/uncertainty.hpp"
#include "medpoc/verification.hpp"
#include "report.hpp"

namespace medpoc::cli {

namespace {

using json = nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 20240611;

std::optional<OrderedValue> bound(const Bound& b) {
  if (!b) return std::nullopt;
  return OrderedValue(*b);
}

Bound json_bound(const json& j) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) {
    auto v = parse_number(j.get<std::string>());
    if (!v) throw UsageError("interval bound '" + j.get<std::string>() + "' is not a number");
    if (std::isinf(*v)) return std::nullopt;
    return v;
  }
  const double v = j.get<double>();
  if (std::isinf(v)) return std::nullopt;
  return v;
}

IntervalSpec json_interval(const json& j) {
  IntervalSpec s;
  if (j.is_array()) {
    if (j.size() != 2) throw UsageError("interval arrays need exactly two bounds");
    s.lower = json_bound(j[0]);
    s.upper = json_bound(j[1]);
    return s;
  }
  s.lower = json_bound(j.value("lower", json()));
  s.upper = json_bound(j.value("upper", json()));
  s.upper_closed = j.value("upper_closed", false);
  return s;
}

QuerySpec json_query(const json& j) {
  QuerySpec q;
  q.x_base = j.value("x_base", q.x_base);
  q.x_alt = j.value("x_alt", q.x_alt);
  q.y = j.value("y", q.y);
  if (j.contains("m") && !j["m"].is_null()) q.m = j["m"].get<double>();
  if (j.contains("stratum")) q.stratum = j["stratum"].get<std::vector<double>>();
  if (j.contains("family")) q.family = parse_family(j["family"].get<std::string>());
  if (j.contains("evidence") && !j["evidence"].is_null()) {
    const json& e = j["evidence"];
    EvidenceSpec ev;
    ev.x = e.at("x").get<double>();
    if (e.contains("m") && !e["m"].is_null()) ev.m = e["m"].get<double>();
    if (e.contains("y_interval")) ev.y = json_interval(e["y_interval"]);
    if (e.contains("y_upper_closed")) ev.y.upper_closed = e["y_upper_closed"].get<bool>();
    if (e.contains("m_interval") && !e["m_interval"].is_null()) {
      ev.m_interval = json_interval(e["m_interval"]);
      if (e.contains("m_upper_closed")) ev.m_interval->upper_closed = e["m_upper_closed"].get<bool>();
    }
    q.evidence = ev;
  }
  return q;
}

void write_output(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (!cfg.out) {
    out << text;
    return;
  }
  std::ofstream f(*cfg.out, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + *cfg.out + "'");
  f << text;
}

std::string format_or(const RunConfig& cfg, const char* fallback) {
  return cfg.format.empty() ? fallback : cfg.format;
}

ojson report_header(const RunConfig& cfg) {
  ojson r;
  r["tool"] = "medpoc";
  r["version"] = kToolVersion;
  r["schema_version"] = kReportSchemaVersion;
  r["command"] = cfg.command;
  r["seed"] = cfg.seed;
  r["input"] = cfg.input ? ojson(*cfg.input) : ojson(nullptr);
  return r;
}

Scm load_scm(const RunConfig& cfg, json* doc_out = nullptr) {
  json doc;
  if (cfg.scm) {
    doc = *cfg.scm;
  } else if (cfg.preset == "paper-bernoulli") {
    doc = Scm::paper_bernoulli_json();
  } else {
    return Scm::preset(cfg.preset);  // throws with the list of presets
  }
  if (doc_out) *doc_out = doc;
  return Scm::from_json(doc);
}

// Every query is checked before any estimation runs.
void validate_targets(const Dataset& d, const std::vector<Target>& targets) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Query& q = targets[i].query;
    const std::string tag = "query " + std::to_string(i + 1) + ": ";
    if (q.stratum.size() != d.covariate_count()) {
      throw SchemaError(tag + "stratum has " + std::to_string(q.stratum.size()) +
                        " values but the schema declares " +
                        std::to_string(d.covariate_count()) + " covariates");
    }
    const Dataset s = q.stratum.empty() ? d : stratify(d, q.stratum);
    const auto xs = s.treatment_support();
    auto need_x = [&](double x, const char* role) {
      if (!std::binary_search(xs.begin(), xs.end(), normalize_level(x))) {
        throw PositivityError(tag + role + " treatment level " + format_number(x) +
                              " has no rows");
      }
    };
    need_x(q.x_base.value(), "baseline");
    need_x(q.x_alt.value(), "alternative");
    if (q.evidence) need_x(q.evidence->x_star().value(), "evidence");
    if (q.m_fixed) {
      const auto ms = s.mediator_support();
      if (!std::binary_search(ms.begin(), ms.end(), normalize_level(q.m_fixed->value()))) {
        throw PositivityError(tag + "mediator level " + format_number(q.m_fixed->value()) +
                              " has no rows");
      }
    }
    if (targets[i].family != Family::pns && q.evidence) {
      throw UsageError(tag + "pn and ps families define their own evidence; drop the evidence flags");
    }
  }
}

}  // namespace

Interval IntervalSpec::to_interval() const {
  return Interval(bound(lower), bound(upper), upper_closed);
}

Evidence EvidenceSpec::to_evidence() const {
  const OrderedValue xs(x);
  if (m_interval) {
    if (m) throw UsageError("give either --evidence-m or --m-interval, not both");
    return Evidence::with_mediator_interval(xs, m_interval->to_interval(), y.to_interval());
  }
  if (m) return Evidence::with_mediator_value(xs, OrderedValue(*m), y.to_interval());
  return Evidence::with_outcome(xs, y.to_interval());
}

Target QuerySpec::to_target() const {
  Target t;
  t.family = family;
  t.query.x_base = OrderedValue(x_base);
  t.query.x_alt = OrderedValue(x_alt);
  t.query.y_threshold = OrderedValue(y);
  if (m) t.query.m_fixed = OrderedValue(*m);
  t.query.stratum = stratum;
  if (evidence) t.query.evidence = evidence->to_evidence();
  return t;
}

IntervalSpec parse_interval(const std::string& text, bool upper_closed) {
  const auto comma = text.find(',');
  if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos) {
    throw UsageError("interval '" + text + "' must look like L,U");
  }
  auto side = [&](const std::string& s) -> Bound {
    if (s.find_first_not_of(" \t") == std::string::npos) return std::nullopt;
    auto v = parse_number(s);
    if (!v) throw UsageError("interval bound '" + s + "' is not a number");
    if (std::isinf(*v)) return std::nullopt;
    return v;
  };
  IntervalSpec out;
  out.lower = side(text.substr(0, comma));
  out.upper = side(text.substr(comma + 1));
  out.upper_closed = upper_closed;
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto v = parse_number(item);
    if (!v) throw UsageError("'" + item + "' is not a number");
    out.push_back(*v);
  }
  if (out.empty()) throw UsageError("empty value list");
  return out;
}

void apply_config_document(const json& doc, RunConfig& cfg) {
  try {
    if (!doc.is_object()) throw UsageError("config document must be a JSON object");
    if (doc.contains("input")) cfg.input = doc["input"].get<std::string>();
    if (doc.contains("out")) cfg.out = doc["out"].get<std::string>();
    if (doc.contains("format")) cfg.format = doc["format"].get<std::string>();
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("schema")) {
      const json& s = doc["schema"];
      cfg.schema.x = s.value("x", cfg.schema.x);
      cfg.schema.m = s.value("m", cfg.schema.m);
      cfg.schema.y = s.value("y", cfg.schema.y);
      if (s.contains("covariates")) {
        cfg.schema.covariates = s["covariates"].get<std::vector<std::string>>();
      }
    }
    if (doc.contains("queries")) {
      cfg.queries.clear();
      for (const auto& q : doc["queries"]) cfg.queries.push_back(json_query(q));
    }
    if (doc.contains("bootstrap")) {
      cfg.replicates = doc["bootstrap"].value("replicates", cfg.replicates);
      cfg.level = doc["bootstrap"].value("level", cfg.level);
    }
    if (doc.contains("preset")) cfg.preset = doc["preset"].get<std::string>();
    if (doc.contains("scm")) cfg.scm = doc["scm"];
    if (doc.contains("n")) cfg.n = doc["n"].get<std::size_t>();
    if (doc.contains("sweep")) {
      const json& s = doc["sweep"];
      cfg.param = s.value("param", cfg.param);
      if (s.contains("values")) cfg.values = s["values"].get<std::vector<double>>();
      if (s.contains("svg")) cfg.svg = s["svg"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid config document: ") + e.what());
  }
}

int cmd_estimate(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  if (!cfg.input) throw UsageError("estimate needs --input");
  const std::string fmt = format_or(cfg, "json");
  const Dataset d = load_dataset_file(*cfg.input, cfg.schema);
  std::vector<Target> targets;
  for (const auto& q : cfg.queries) targets.push_back(q.to_target());
  validate_targets(d, targets);

  ojson r = report_header(cfg);
  r["rows"] = d.size();
  r["schema"] = {{"x", cfg.schema.x},
                 {"m", cfg.schema.m},
                 {"y", cfg.schema.y},
                 {"covariates", cfg.schema.covariates}};
  if (cfg.replicates > 0) {
    r["bootstrap"] = {{"replicates", cfg.replicates}, {"level", cfg.level}, {"method", "percentile"}};
  } else {
    r["bootstrap"] = nullptr;
  }
  ojson blocks = ojson::array();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (cfg.replicates > 0) {
      BootstrapConfig bc;
      bc.replicates = cfg.replicates;
      bc.level = cfg.level;
      bc.seed = substream_seed(cfg.seed, i);
      const BootstrapResult res = bootstrap_ci(d, targets[i], bc);
      blocks.push_back(estimate_block(targets[i], res.point, &res));
    } else {
      blocks.push_back(estimate_block(targets[i], estimate(d, targets[i]), nullptr));
    }
  }
  r["queries"] = blocks;
  r["error"] = nullptr;
  write_output(cfg, out, fmt == "table" ? render_estimate_table(r) : r.dump(2) + "\n");
  return kOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.n == 0) throw UsageError("--n must be positive");
  const Scm scm = load_scm(cfg);
  const Dataset d = sample_observational(scm, cfg.n, cfg.seed);
  std::ostringstream os;
  write_csv(os, d);
  write_output(cfg, out, os.str());
  return kOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::string fmt = format_or(cfg, "table");
  const Scm scm = Scm::paper_bernoulli();
  Target pns;
  pns.query.x_base = OrderedValue(0.0);
  pns.query.x_alt = OrderedValue(1.0);
  pns.query.y_threshold = OrderedValue(1.0);
  Target pn = pns;
  pn.family = Family::pn;
  const auto truth = truth_pns(scm, pns.query);
  const auto truth_pn = truth_with_evidence(scm, pns.query, pn_evidence(pns.query));

  ojson r = report_header(cfg);
  r["quick"] = cfg.quick;
  bool passed = true;
  ojson rows = ojson::array();
  const std::size_t replicates = cfg.quick ? 200 : 1000;
  for (std::size_t n : {100u, 1000u, 10000u}) {
    const Dataset d = sample_observational(scm, n, substream_seed(cfg.seed, n));
    for (int fam = 0; fam < 2; ++fam) {
      BootstrapConfig bc;
      bc.replicates = replicates;
      bc.seed = substream_seed(cfg.seed + 1 + static_cast<std::uint64_t>(fam), n);
      const BootstrapResult res = bootstrap_ci(d, fam ? pn : pns, bc);
      const char* names[2][3] = {{"T-PNS", "ND-PNS", "NI-PNS"}, {"PN", "ND-PN", "NI-PN"}};
      const char* truth_names[3] = {"T-PNS", "ND-PNS", "NI-PNS"};
      for (int k = 0; k < 3; ++k) {
        const double t = fam ? truth_pn.at(truth_names[k]) : truth.at(truth_names[k]);
        const auto& ci = res.intervals.at(static_cast<std::size_t>(k));
        ojson row;
        row["n"] = n;
        row["quantity"] = names[fam][k];
        row["truth"] = t;
        row["estimate"] = number_or_null(ci.point);
        row["lower"] = number_or_null(ci.lower);
        row["upper"] = number_or_null(ci.upper);
        if (n == 10000) {
          constexpr double kTol = 0.015;
          const bool ok = ci.point && std::abs(*ci.point - t) <= kTol;
          row["tolerance"] = kTol;
          row["status"] = ok ? "pass" : "fail";
          passed = passed && ok;
        } else {
          row["tolerance"] = nullptr;
          row["status"] = "info";
        }
        rows.push_back(row);
      }
    }
  }
  r["protocol"] = rows;

  VerifyOptions opts;
  opts.quick = cfg.quick;
  opts.seed = cfg.seed;
  ojson crit = ojson::array();
  for (const auto& c : run_all_criteria(opts)) {
    ojson j;
    j["id"] = c.id;
    j["title"] = c.title;
    j["status"] = c.excluded ? "excluded" : (c.passed ? "pass" : "fail");
    j["passed"] = c.passed;
    j["detail"] = c.detail;
    j["line"] = format_criterion_line(c, false);
    crit.push_back(j);
    passed = passed && c.passed;
    if (!c.passed) err << "verify: criterion " << c.id << " failed: " << c.detail << "\n";
  }
  r["criteria"] = crit;
  r["passed"] = passed;
  write_output(cfg, out, fmt == "json" ? r.dump(2) + "\n" : render_verify_table(r));
  return passed ? kOk : kVerifyFailed;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.param.empty()) throw UsageError("sweep needs --param (y, stratum or a JSON pointer)");
  if (cfg.values.empty()) throw UsageError("sweep needs --values");
  const std::string fmt = format_or(cfg, "csv");
  if (cfg.queries.size() != 1) throw UsageError("sweep runs exactly one base query");
  const bool pointer = cfg.param.front() == '/';
  if (cfg.param != "y" && cfg.param != "stratum" && !pointer) {
    throw UsageError("unknown sweep parameter '" + cfg.param + "'");
  }

  std::optional<Dataset> data;
  json scm_doc;
  std::optional<Scm> scm;
  if (cfg.input) {
    if (pointer) throw UsageError("model-parameter sweeps need a model, not --input");
    data = load_dataset_file(*cfg.input, cfg.schema);
  } else {
    scm = load_scm(cfg, &scm_doc);
  }
  const std::size_t n_cov = data ? data->covariate_count() : scm->covariates().size();

  ojson r = report_header(cfg);
  r["param"] = cfg.param;
  r["source"] = data ? "empirical" : "analytic";
  Target base = cfg.queries.front().to_target();
  r["query"] = query_json(base);
  ojson rows = ojson::array();
  std::size_t flagged = 0;
  for (double v : cfg.values) {
    Target t = base;
    try {
      std::optional<Scm> local;
      if (cfg.param == "y") {
        t.query.y_threshold = OrderedValue(v);
      } else if (cfg.param == "stratum") {
        if (n_cov == 0) throw UsageError("stratum sweep needs a covariate");
        if (t.query.stratum.empty()) t.query.stratum.assign(n_cov, 0.0);
        t.query.stratum.front() = v;
      } else {
        json doc = scm_doc;
        try {
          doc[json::json_pointer(cfg.param)] = v;
        } catch (const json::exception& e) {
          throw UsageError(std::string("bad JSON pointer: ") + e.what());
        }
        local = Scm::from_json(doc);
      }
      Estimate e;
      if (data) {
        validate_targets(*data, {t});
        e = estimate(*data, t);
      } else {
        const Scm& s = local ? *local : *scm;
        e = evaluate(AnalyticCdf(s, t.query.stratum), t);
      }
      for (const auto& nv : e.values) {
        ojson row;
        row["point"] = v;
        row["quantity"] = nv.name;
        row["value"] = number_or_null(nv.value);
        row["case"] = case_flag_name(e.case_flag);
        row["status"] = "ok";
        rows.push_back(row);
      }
    } catch (const UsageError&) {
      throw;
    } catch (const Error& ex) {
      ++flagged;
      err << "warning: grid point " << format_number(v) << ": "
          << error_kind_name(ex.kind()) << ": " << ex.what() << "\n";
      ojson row;
      row["point"] = v;
      row["quantity"] = "";
      row["value"] = nullptr;
      row["case"] = "-";
      row["status"] = std::string("error ") + error_kind_name(ex.kind()) + ": " + ex.what();
      rows.push_back(row);
    }
  }
  r["rows"] = rows;
  r["flagged_points"] = flagged;
  std::string text = fmt == "json" ? r.dump(2) + "\n"
                     : fmt == "table" ? render_sweep_table(r)
                                      : render_sweep_csv(r);
  write_output(cfg, out, text);
  if (cfg.svg) {
    std::ofstream f(*cfg.svg, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + *cfg.svg + "'");
    f << render_sweep_svg(r);
  }
  return kOk;
}

namespace {

struct Flags {
  std::optional<std::string> input, config, out, format;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> x_col, m_col, y_col, covariates;
  std::optional<double> x_base, x_alt, y, m;
  std::optional<std::string> stratum, family;
  std::optional<double> ev_x, ev_m;
  std::optional<std::string> y_interval, m_interval;
  bool y_upper_closed = false, m_upper_closed = false;
  std::optional<std::size_t> bootstrap;
  std::optional<double> level;
  std::optional<std::string> preset;
  std::optional<std::size_t> n;
  bool quick = false;
  std::optional<std::string> param, values, svg;
};

void add_common(CLI::App* c, Flags& f) {
  c->add_option("--input", f.input, "CSV data file");
  c->add_option("--config", f.config, "JSON config document (flags override it)");
  c->add_option("--out", f.out, "output path (default: standard output)");
  c->add_option("--seed", f.seed, "master seed");
  c->add_option("--format", f.format, "json | table (sweep also: csv)")
      ->check(CLI::IsMember({"json", "table", "csv"}));
}

void add_query(CLI::App* c, Flags& f) {
  c->add_option("--x-col", f.x_col, "treatment column");
  c->add_option("--m-col", f.m_col, "mediator column");
  c->add_option("--y-col", f.y_col, "outcome column");
  c->add_option("--covariates", f.covariates, "comma-separated covariate columns");
  c->add_option("--x-base", f.x_base, "baseline treatment x'");
  c->add_option("--x-alt", f.x_alt, "alternative treatment x");
  c->add_option("--y", f.y, "outcome threshold y");
  c->add_option("--m", f.m, "mediator level for the controlled-direct quantity");
  c->add_option("--stratum", f.stratum, "comma-separated covariate values");
  c->add_option("--family", f.family, "pns | pn | ps")->check(CLI::IsMember({"pns", "pn", "ps"}));
  c->add_option("--evidence-x", f.ev_x, "observed treatment x*");
  c->add_option("--evidence-m", f.ev_m, "observed mediator m*");
  c->add_option("--y-interval", f.y_interval, "observed outcome interval L,U (lower closed)");
  c->add_flag("--y-upper-closed", f.y_upper_closed, "close the outcome interval on the right");
  c->add_option("--m-interval", f.m_interval, "observed mediator interval L,U (lower closed)");
  c->add_flag("--m-upper-closed", f.m_upper_closed, "close the mediator interval on the right");
}

bool has_query_flags(const Flags& f) {
  return f.x_base || f.x_alt || f.y || f.m || f.stratum || f.family || f.ev_x || f.ev_m ||
         f.y_interval || f.m_interval || f.y_upper_closed || f.m_upper_closed;
}

RunConfig build_config(const std::string& command, const Flags& f) {
  RunConfig cfg;
  cfg.command = command;
  cfg.seed = kDefaultSeed;
  if (f.config) {
    std::ifstream in(*f.config);
    if (!in) throw UsageError("cannot open config '" + *f.config + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError(std::string("config is not valid JSON: ") + e.what());
    }
    apply_config_document(doc, cfg);
  }
  if (f.input) cfg.input = f.input;
  if (f.out) cfg.out = f.out;
  if (f.format) cfg.format = *f.format;
  if (f.seed) cfg.seed = *f.seed;
  if (f.x_col) cfg.schema.x = *f.x_col;
  if (f.m_col) cfg.schema.m = *f.m_col;
  if (f.y_col) cfg.schema.y = *f.y_col;
  if (f.covariates) {
    cfg.schema.covariates.clear();
    std::stringstream ss(*f.covariates);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) cfg.schema.covariates.push_back(item);
    }
  }
  if (f.bootstrap) cfg.replicates = *f.bootstrap;
  if (f.level) cfg.level = *f.level;
  if (f.preset) {
    cfg.preset = *f.preset;
    cfg.scm.reset();
  }
  if (f.n) cfg.n = *f.n;
  cfg.quick = cfg.quick || f.quick;
  if (f.param) cfg.param = *f.param;
  if (f.values) cfg.values = parse_list(*f.values);
  if (f.svg) cfg.svg = f.svg;

  if (cfg.queries.empty()) cfg.queries.emplace_back();
  if (has_query_flags(f)) {
    for (auto& q : cfg.queries) {
      if (f.x_base) q.x_base = *f.x_base;
      if (f.x_alt) q.x_alt = *f.x_alt;
      if (f.y) q.y = *f.y;
      if (f.m) q.m = *f.m;
      if (f.stratum) q.stratum = parse_list(*f.stratum);
      if (f.family) q.family = parse_family(*f.family);
      if (f.ev_x) {
        q.evidence = EvidenceSpec{};
        q.evidence->x = *f.ev_x;
      }
      const bool ev_detail = f.ev_m || f.y_interval || f.m_interval || f.y_upper_closed ||
                             f.m_upper_closed;
      if (ev_detail && !q.evidence) throw UsageError("evidence flags need --evidence-x");
      if (!q.evidence) continue;
      if (f.ev_m) q.evidence->m = *f.ev_m;
      if (f.y_interval) q.evidence->y = parse_interval(*f.y_interval, f.y_upper_closed);
      else if (f.y_upper_closed) q.evidence->y.upper_closed = true;
      if (f.m_interval) q.evidence->m_interval = parse_interval(*f.m_interval, f.m_upper_closed);
      else if (f.m_upper_closed && q.evidence->m_interval) q.evidence->m_interval->upper_closed = true;
    }
  }
  if (cfg.replicates == 1) throw UsageError("--bootstrap needs 0 (off) or at least 2 replicates");
  if (cfg.replicates > 0 && !(cfg.level > 0.0 && cfg.level < 1.0)) {
    throw UsageError("--level must lie strictly between 0 and 1");
  }
  return cfg;
}

void write_error(const RunConfig* cfg, const std::string& command, std::ostream& out,
                 std::ostream& err, const std::string& kind, const std::string& message) {
  err << "error (" << kind << "): " << message << "\n";
  if (!cfg || command != "estimate") return;
  if (cfg->format == "table") {
    try {
      write_output(*cfg, out, "error (" + kind + "): " + message + "\n");
    } catch (const Error&) {
    }
    return;
  }
  // Machine-readable block for JSON reports.
  ojson r;
  r["tool"] = "medpoc";
  r["version"] = kToolVersion;
  r["schema_version"] = kReportSchemaVersion;
  r["command"] = command;
  r["error"] = error_block(kind, message);
  try {
    write_output(*cfg, out, r.dump(2) + "\n");
  } catch (const Error&) {
    out << r.dump(2) << "\n";
  }
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probabilities of causation for mediated effects"};
  app.set_version_flag("--version", std::string("medpoc ") + kToolVersion);
  app.require_subcommand(1);
  Flags f;
  auto* est = app.add_subcommand("estimate", "estimate PNS/PN/PS families from CSV data");
  add_common(est, f);
  add_query(est, f);
  est->add_option("--bootstrap", f.bootstrap, "bootstrap replicates (0 disables; default 1000)");
  est->add_option("--level", f.level, "confidence level (default 0.95)");

  auto* sim = app.add_subcommand("simulate", "sample observational data from a model");
  add_common(sim, f);
  sim->add_option("--preset", f.preset, "built-in model (paper-bernoulli)");
  sim->add_option("--n", f.n, "number of rows");

  auto* ver = app.add_subcommand("verify", "check identification against the oracle");
  add_common(ver, f);
  ver->add_flag("--quick", f.quick, "fewer replicates and runs");

  auto* swp = app.add_subcommand("sweep", "evaluate a query over a parameter grid");
  add_common(swp, f);
  add_query(swp, f);
  swp->add_option("--preset", f.preset, "built-in model when no --input is given");
  swp->add_option("--param", f.param, "y | stratum | JSON pointer into the model document");
  swp->add_option("--values", f.values, "comma-separated grid values");
  swp->add_option("--svg", f.svg, "also write a line chart");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << "medpoc " << kToolVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error (usage): " << e.what() << "\n";
    return kUsageOrData;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::optional<RunConfig> cfg;
  try {
    cfg = build_config(command, f);
    if (command == "estimate") return cmd_estimate(*cfg, out, err);
    if (command == "simulate") return cmd_simulate(*cfg, out, err);
    if (command == "verify") return cmd_verify(*cfg, out, err);
    return cmd_sweep(*cfg, out, err);
  } catch (const Error& e) {
    write_error(cfg ? &*cfg : nullptr, command, out, err, error_kind_name(e.kind()), e.what());
    return kUsageOrData;
  } catch (const std::exception& e) {
    write_error(cfg ? &*cfg : nullptr, command, out, err, "internal", e.what());
    return kUsageOrData;
  }
}

}  // namespace medpoc::cli
