#include "medpoc/ecdf.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace medpoc {

std::size_t count_below(const std::vector<double>& ys, double y, Strictness s) {
  if (y == INFINITY) return ys.size();
  if (y == -INFINITY) return 0;
  auto it = s == Strictness::strict
                ? std::lower_bound(ys.begin(), ys.end(), y)
                : std::upper_bound(ys.begin(), ys.end(), y);
  return static_cast<std::size_t>(it - ys.begin());
}

namespace {

bool below(double v, double t, Strictness s) {
  return s == Strictness::strict ? v < t : v <= t;
}

}  // namespace

EmpiricalCdf::EmpiricalCdf(const Dataset& d) {
  std::vector<std::tuple<double, double, double>> rows(d.size());
  auto x = d.x();
  auto m = d.m();
  auto y = d.y();
  for (std::size_t i = 0; i < d.size(); ++i) rows[i] = {x[i], m[i], y[i]};
  std::sort(rows.begin(), rows.end());

  for (const auto& [xi, mi, yi] : rows) {
    if (cells_.empty() || cells_.back().x != xi) {
      cells_.push_back(TreatmentCell{xi, {}, {}});
    }
    auto& tc = cells_.back();
    if (tc.cells.empty() || tc.cells.back().m != mi) {
      tc.cells.push_back(MediatorCell{mi, {}});
    }
    tc.cells.back().ys.push_back(yi);
  }
  for (auto& tc : cells_) {
    std::size_t n = 0;
    for (const auto& mc : tc.cells) n += mc.ys.size();
    tc.ys.reserve(n);
    for (const auto& mc : tc.cells) {
      tc.ys.insert(tc.ys.end(), mc.ys.begin(), mc.ys.end());
    }
    std::sort(tc.ys.begin(), tc.ys.end());
  }
}

const EmpiricalCdf::TreatmentCell& EmpiricalCdf::cell(double x) const {
  x = normalize_level(x);
  auto it = std::lower_bound(
      cells_.begin(), cells_.end(), x,
      [](const TreatmentCell& c, double v) { return c.x < v; });
  if (it == cells_.end() || it->x != x) {
    throw PositivityError("no rows with X=" + format_number(x));
  }
  return *it;
}

const EmpiricalCdf::MediatorCell* EmpiricalCdf::find(const TreatmentCell& tc,
                                                     double m) const {
  m = normalize_level(m);
  auto it = std::lower_bound(
      tc.cells.begin(), tc.cells.end(), m,
      [](const MediatorCell& c, double v) { return c.m < v; });
  if (it == tc.cells.end() || it->m != m) return nullptr;
  return &*it;
}

double EmpiricalCdf::cdf_y_given_x(double y, double x, Strictness s) const {
  const auto& tc = cell(x);
  return static_cast<double>(count_below(tc.ys, y, s)) /
         static_cast<double>(tc.ys.size());
}

double EmpiricalCdf::cdf_y_given_xm(double y, double x, double m,
                                    Strictness s) const {
  const auto* mc = find(cell(x), m);
  if (mc == nullptr) {
    throw PositivityError("no rows with X=" + format_number(x) +
                          ", M=" + format_number(m));
  }
  return static_cast<double>(count_below(mc->ys, y, s)) /
         static_cast<double>(mc->ys.size());
}

double EmpiricalCdf::mediator_pmf(double m, double x) const {
  const auto& tc = cell(x);
  const auto* mc = find(tc, m);
  if (mc == nullptr) return 0.0;
  return static_cast<double>(mc->ys.size()) /
         static_cast<double>(tc.ys.size());
}

std::vector<double> EmpiricalCdf::mediator_support(double x) const {
  std::vector<double> out;
  for (const auto& mc : cell(x).cells) out.push_back(mc.m);
  return out;
}

double EmpiricalCdf::joint_cdf_ym_given_x(double y, double m, double x,
                                          Strictness sy,
                                          Strictness sm) const {
  const auto& tc = cell(x);
  if (m == INFINITY) {
    return static_cast<double>(count_below(tc.ys, y, sy)) /
           static_cast<double>(tc.ys.size());
  }
  std::size_t hits = 0;
  for (const auto& mc : tc.cells) {
    if (!below(mc.m, m, sm)) break;
    hits += count_below(mc.ys, y, sy);
  }
  return static_cast<double>(hits) / static_cast<double>(tc.ys.size());
}

double EmpiricalCdf::union_cdf_ym_given_x(double y, double m, double x) const {
  const auto& tc = cell(x);
  // Complement: rows with Y >= y and M >= m.
  std::size_t outside = 0;
  for (const auto& mc : tc.cells) {
    if (mc.m < m) continue;
    outside += mc.ys.size() - count_below(mc.ys, y, Strictness::strict);
  }
  return static_cast<double>(tc.ys.size() - outside) /
         static_cast<double>(tc.ys.size());
}

double EmpiricalCdf::rho(double y, double x_base, double x_alt) const {
  const auto& base = cell(x_base);
  const auto& alt = cell(x_alt);
  double acc = 0.0;
  for (const auto& mc : alt.cells) {
    const auto* bc = find(base, mc.m);
    if (bc == nullptr) {
      throw PositivityError("no rows with X=" + format_number(x_base) +
                            ", M=" + format_number(mc.m) +
                            " (needed by the mediation functional)");
    }
    const double hits =
        static_cast<double>(count_below(bc->ys, y, Strictness::strict));
    acc += hits * static_cast<double>(mc.ys.size()) /
           static_cast<double>(bc->ys.size());
  }
  return acc / static_cast<double>(alt.ys.size());
}

std::vector<double> EmpiricalCdf::treatment_support() const {
  std::vector<double> out;
  for (const auto& tc : cells_) out.push_back(tc.x);
  return out;
}

std::size_t EmpiricalCdf::count(double x) const { return cell(x).ys.size(); }

std::size_t EmpiricalCdf::count(double x, double m) const {
  const auto* mc = find(cell(x), m);
  return mc == nullptr ? 0 : mc->ys.size();
}

}  // namespace medpoc
