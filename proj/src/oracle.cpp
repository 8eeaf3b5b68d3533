#include "medpoc/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "medpoc/rng.hpp"

namespace medpoc {

const char* method_name(Method m) noexcept {
  return m == Method::exact ? "exact" : "monte-carlo";
}

double TruthReport::at(std::string_view name) const {
  if (auto v = find(name)) return *v;
  throw std::out_of_range("no truth named " + std::string(name));
}

std::optional<double> TruthReport::find(std::string_view name) const {
  for (const auto& v : values) {
    if (v.name == name) return v.value;
  }
  return std::nullopt;
}

namespace {

constexpr std::uint64_t kBlock = 65536;

// Segment tables for every covariate configuration, built once per call.
class Compiled {
 public:
  explicit Compiled(const Scm& scm)
      : scm_(scm),
        nx_(scm.treatment().levels.size()),
        nm_(scm.mediator().levels.size()),
        nc_(scm.covariate_configs()) {
    double acc = 0.0;
    for (std::size_t c = 0; c < nc_; ++c) {
      acc += scm.covariate_prob(c);
      cov_cdf_.push_back(acc);
      tseg_.push_back(scm.treatment_segments(c));
      for (std::size_t x = 0; x < nx_; ++x) {
        mseg_.push_back(scm.mediator_segments(x, c));
        for (std::size_t m = 0; m < nm_; ++m) {
          if (scm.discrete()) {
            yseg_.push_back(scm.outcome_segments(x, m, c));
          } else {
            yseg_.emplace_back();
          }
        }
      }
    }
  }

  const Scm& scm() const { return scm_; }
  std::size_t nx() const { return nx_; }
  std::size_t nm() const { return nm_; }
  std::size_t nc() const { return nc_; }

  const std::vector<Segment>& tseg(std::size_t c) const { return tseg_[c]; }
  const std::vector<Segment>& mseg(std::size_t c, std::size_t x) const {
    return mseg_[c * nx_ + x];
  }
  const std::vector<Segment>& yseg(std::size_t c, std::size_t x,
                                   std::size_t m) const {
    return yseg_[(c * nx_ + x) * nm_ + m];
  }

  std::size_t draw_config(double u) const {
    for (std::size_t c = 0; c + 1 < nc_; ++c) {
      if (u < cov_cdf_[c]) return c;
    }
    return nc_ - 1;
  }

  double y_value(std::size_t c, std::size_t x, std::size_t m, double u) const {
    if (!scm_.discrete()) return scm_.outcome_value(x, m, c, u);
    return scm_.outcome().levels[level_at(yseg(c, x, m), u)];
  }

 private:
  const Scm& scm_;
  std::size_t nx_, nm_, nc_;
  std::vector<double> cov_cdf_;
  std::vector<std::vector<Segment>> tseg_, mseg_, yseg_;
};

template <bool Parallel>
Dataset sample_impl(const Scm& scm, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw UsageError("sample size must be at least 1");
  Compiled cm(scm);
  std::vector<double> x(n), m(n), y(n);
  const std::size_t k = scm.covariates().size();
  std::vector<std::vector<double>> cov(k, std::vector<double>(n));
  const std::int64_t blocks = static_cast<std::int64_t>((n + kBlock - 1) / kBlock);

#pragma omp parallel for schedule(static) if (Parallel)
  for (std::int64_t b = 0; b < blocks; ++b) {
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(b)));
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = std::min<std::size_t>(n, lo + kBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      const double uc = rng.uniform();
      const double ux = rng.uniform();
      const double um = rng.uniform();
      const double uy = rng.uniform();
      const std::size_t c = cm.draw_config(uc);
      const std::size_t xi = level_at(cm.tseg(c), ux);
      const std::size_t mi = level_at(cm.mseg(c, xi), um);
      x[i] = scm.treatment().levels[xi];
      m[i] = scm.mediator().levels[mi];
      y[i] = cm.y_value(c, xi, mi, uy);
      if (k > 0) {
        auto cv = scm.covariate_values(c);
        for (std::size_t j = 0; j < k; ++j) cov[j][i] = cv[j];
      }
    }
  }

  Schema schema;
  for (const auto& c : scm.covariates()) schema.covariates.push_back(c.name);
  return Dataset(std::move(schema), std::move(x), std::move(m), std::move(y),
                 std::move(cov));
}

// ---------------------------------------------------------------------------
// Exogenous partition for one covariate configuration.

struct Partition {
  std::vector<double> wm;                      // u_M cell widths
  std::vector<std::vector<std::size_t>> mlev;  // [x][k]
  std::vector<double> wy;                      // u_Y cell widths
  std::vector<std::vector<std::size_t>> ylev;  // [x * nm + m][j]
};

void cells_from(const std::vector<const std::vector<Segment>*>& lists,
                std::vector<double>& widths, std::vector<double>& mids) {
  std::vector<double> cuts{0.0, 1.0};
  for (const auto* segs : lists) {
    for (const auto& s : *segs) {
      cuts.push_back(s.lo);
      cuts.push_back(s.hi);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double w = cuts[i + 1] - cuts[i];
    if (w > 0.0) {
      widths.push_back(w);
      mids.push_back(cuts[i] + 0.5 * w);
    }
  }
}

Partition build_partition(const Compiled& cm, std::size_t c) {
  if (!cm.scm().discrete()) {
    throw UnsupportedSpecError(
        "exact evaluation needs a discrete outcome; use the monte-carlo method");
  }
  Partition p;
  std::vector<const std::vector<Segment>*> ml, yl;
  for (std::size_t x = 0; x < cm.nx(); ++x) {
    ml.push_back(&cm.mseg(c, x));
    for (std::size_t m = 0; m < cm.nm(); ++m) yl.push_back(&cm.yseg(c, x, m));
  }
  std::vector<double> mm, ym;
  cells_from(ml, p.wm, mm);
  cells_from(yl, p.wy, ym);
  p.mlev.resize(cm.nx());
  for (std::size_t x = 0; x < cm.nx(); ++x) {
    for (double u : mm) p.mlev[x].push_back(level_at(cm.mseg(c, x), u));
  }
  p.ylev.resize(cm.nx() * cm.nm());
  for (std::size_t x = 0; x < cm.nx(); ++x) {
    for (std::size_t m = 0; m < cm.nm(); ++m) {
      for (double u : ym) {
        p.ylev[x * cm.nm() + m].push_back(level_at(cm.yseg(c, x, m), u));
      }
    }
  }
  return p;
}

// Query resolved to level indices and threshold counts.  For a threshold t,
// "Y < t" is equivalent to "level index < cut(t)".
struct Resolved {
  std::size_t xb, xa;
  std::optional<std::size_t> m;
  std::size_t ycut;
  std::vector<std::size_t> configs;  // covariate configurations in scope
  bool marginal = false;             // several configurations, weighted
};

std::size_t cut_strict(const std::vector<double>& levels, double t) {
  return static_cast<std::size_t>(
      std::lower_bound(levels.begin(), levels.end(), t) - levels.begin());
}

std::size_t cut_inclusive(const std::vector<double>& levels, double t) {
  return static_cast<std::size_t>(
      std::upper_bound(levels.begin(), levels.end(), t) - levels.begin());
}

Resolved resolve(const Scm& scm, const Query& q) {
  Resolved r;
  r.xb = scm.treatment_level_index(q.x_base.value());
  r.xa = scm.treatment_level_index(q.x_alt.value());
  if (q.m_fixed) r.m = scm.mediator_level_index(q.m_fixed->value());
  r.ycut = scm.discrete() ? cut_strict(scm.outcome().levels, q.y_threshold.value()) : 0;
  if (!q.stratum.empty()) {
    r.configs.push_back(scm.covariate_config(q.stratum));
  } else {
    for (std::size_t c = 0; c < scm.covariate_configs(); ++c) r.configs.push_back(c);
    r.marginal = r.configs.size() > 1;
  }
  return r;
}

// Evidence interval as level-index range [lo, hi) for a discrete node.
struct LevelRange {
  std::size_t lo;
  std::size_t hi;
  bool contains(std::size_t l) const { return l >= lo && l < hi; }
};

LevelRange level_range(const std::vector<double>& levels, const Interval& iv) {
  LevelRange r;
  r.lo = cut_strict(levels, iv.lower_threshold());
  r.hi = iv.upper_closed() ? cut_inclusive(levels, iv.upper_threshold())
                           : cut_strict(levels, iv.upper_threshold());
  if (!iv.upper()) r.hi = levels.size();
  return r;
}

double treatment_prob(const Compiled& cm, std::size_t c, std::size_t x) {
  double p = 0.0;
  for (const auto& s : cm.tseg(c)) {
    if (s.level == x) p += s.hi - s.lo;
  }
  return p;
}

// Natural-family indicator masks on a cell.
struct NaturalBits {
  bool t, nd, ni;
};

NaturalBits natural_bits(std::size_t y_base, std::size_t y_alt,
                         std::size_t y_cross, std::size_t cut) {
  const bool t = y_base < cut && y_alt >= cut;
  return {t, t && y_cross < cut, t && y_cross >= cut};
}

}  // namespace

Dataset sample_observational(const Scm& scm, std::size_t n, std::uint64_t seed) {
  return sample_impl<true>(scm, n, seed);
}

Dataset sample_observational_serial(const Scm& scm, std::size_t n,
                                    std::uint64_t seed) {
  return sample_impl<false>(scm, n, seed);
}

// ---------------------------------------------------------------------------
// Monte Carlo

namespace {

enum Bit : unsigned { kIn = 1, kT = 2, kND = 4, kNI = 8, kCD = 16 };

struct McSetup {
  const Compiled* cm;
  Resolved r;
  const Evidence* e = nullptr;
  std::size_t xs = 0, ms = 0;
  bool check_x = false;
};

unsigned mc_eval(const McSetup& s, const Query& q, Rng& rng) {
  const Compiled& cm = *s.cm;
  const double uc = rng.uniform();
  const double ux = rng.uniform();
  const double um = rng.uniform();
  const double uy = rng.uniform();
  const std::size_t c =
      s.r.configs.size() == 1 ? s.r.configs[0] : cm.draw_config(uc);
  const double yt = q.y_threshold.value();
  auto med = [&](std::size_t x) { return level_at(cm.mseg(c, x), um); };
  auto out = [&](std::size_t x, std::size_t m) { return cm.y_value(c, x, m, uy); };

  if (s.e != nullptr) {
    if (s.check_x && level_at(cm.tseg(c), ux) != s.xs) return 0;
    const Interval& iy = s.e->y_interval();
    bool in = false;
    switch (s.e->kind()) {
      case EvidenceKind::mediator_value:
        in = med(s.xs) == s.ms && iy.contains(out(s.xs, s.ms));
        break;
      case EvidenceKind::outcome_only:
        in = iy.contains(out(s.xs, med(s.xs)));
        break;
      case EvidenceKind::mediator_interval: {
        const std::size_t mx = med(s.xs);
        in = s.e->m_interval()->contains(cm.scm().mediator().levels[mx]) &&
             iy.contains(out(s.xs, mx));
        break;
      }
    }
    if (!in) return 0;
  }
  unsigned bits = kIn;
  const std::size_t mb = med(s.r.xb);
  const std::size_t ma = med(s.r.xa);
  const double y_base = out(s.r.xb, mb);
  const double y_alt = out(s.r.xa, ma);
  const double y_cross = out(s.r.xb, ma);
  if (y_base < yt && !(y_alt < yt)) {
    bits |= kT;
    bits |= y_cross < yt ? kND : kNI;
  }
  if (s.r.m) {
    if (out(s.r.xb, *s.r.m) < yt && !(out(s.r.xa, *s.r.m) < yt)) bits |= kCD;
  }
  return bits;
}

template <bool Parallel>
std::array<std::uint64_t, 5> mc_counts(const McSetup& s, const Query& q,
                                       std::uint64_t samples,
                                       std::uint64_t seed) {
  std::uint64_t in = 0, t = 0, nd = 0, ni = 0, cd = 0;
  const std::int64_t blocks =
      static_cast<std::int64_t>((samples + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static) reduction(+ : in, t, nd, ni, cd) if (Parallel)
  for (std::int64_t b = 0; b < blocks; ++b) {
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(b)));
    const std::uint64_t lo = static_cast<std::uint64_t>(b) * kBlock;
    const std::uint64_t hi = std::min<std::uint64_t>(samples, lo + kBlock);
    for (std::uint64_t i = lo; i < hi; ++i) {
      const unsigned bits = mc_eval(s, q, rng);
      in += (bits & kIn) != 0;
      t += (bits & kT) != 0;
      nd += (bits & kND) != 0;
      ni += (bits & kNI) != 0;
      cd += (bits & kCD) != 0;
    }
  }
  return {in, t, nd, ni, cd};
}

TruthValue mc_value(const char* name, std::uint64_t hits, std::uint64_t n) {
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {name, p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

template <bool Parallel>
TruthReport mc_truth(const Scm& scm, const Query& q, const Evidence* e,
                     std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw UsageError("Monte Carlo sample count must be positive");
  Compiled cm(scm);
  McSetup s{&cm, resolve(scm, q)};
  s.e = e;
  bool cd_only = false;
  if (e != nullptr) {
    s.xs = scm.treatment_level_index(e->x_star().value());
    if (e->kind() == EvidenceKind::mediator_value) {
      if (!s.r.m) throw UsageError("mediator-value evidence needs a fixed mediator level");
      s.ms = scm.mediator_level_index(e->m_star()->value());
      cd_only = true;
    }
    s.check_x = s.r.marginal;
  }
  auto c = mc_counts<Parallel>(s, q, samples, seed);
  if (c[0] == 0) {
    throw ConditioningError("no Monte Carlo draw satisfied the evidence");
  }
  TruthReport rep;
  rep.method = Method::monte_carlo;
  rep.samples = c[0];
  rep.case_flag = e == nullptr ? CaseFlag::unconditional : CaseFlag::A;
  if (!cd_only) {
    rep.values.push_back(mc_value("T-PNS", c[1], c[0]));
    rep.values.push_back(mc_value("ND-PNS", c[2], c[0]));
    rep.values.push_back(mc_value("NI-PNS", c[3], c[0]));
  }
  if (s.r.m) rep.values.push_back(mc_value("CD-PNS", c[4], c[0]));
  return rep;
}

// ---------------------------------------------------------------------------
// Exact path

// Cells sorted by how many lower events of the monotone family contain them,
// most first: the chain order the identification proofs integrate along.
std::vector<std::pair<std::size_t, std::size_t>> chain_order(
    const Partition& p, const Compiled& cm, bool with_mediator_events) {
  const std::size_t ly = cm.scm().outcome().levels.size();
  const std::size_t lm = cm.scm().mediator().levels.size();
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  std::vector<std::size_t> score;
  for (std::size_t k = 0; k < p.wm.size(); ++k) {
    for (std::size_t j = 0; j < p.wy.size(); ++j) {
      std::size_t s = 0;
      for (std::size_t a = 0; a < cm.nx(); ++a) {
        for (std::size_t b = 0; b < cm.nx(); ++b) {
          s += ly - 1 - p.ylev[a * cm.nm() + p.mlev[b][k]][j];
        }
      }
      if (with_mediator_events) {
        for (std::size_t b = 0; b < cm.nx(); ++b) s += lm - 1 - p.mlev[b][k];
      }
      cells.emplace_back(k, j);
      score.push_back(s);
    }
  }
  std::vector<std::size_t> idx(cells.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i : idx) out.push_back(cells[i]);
  return out;
}

TruthReport exact_truth(const Scm& scm, const Query& q) {
  Compiled cm(scm);
  Resolved r = resolve(scm, q);
  double t = 0.0, nd = 0.0, ni = 0.0, cd = 0.0;
  for (std::size_t c : r.configs) {
    const double wc = r.marginal ? scm.covariate_prob(c) : 1.0;
    Partition p = build_partition(cm, c);
    double tc = 0.0, ndc = 0.0, nic = 0.0;
    for (std::size_t k = 0; k < p.wm.size(); ++k) {
      double rt = 0.0, rnd = 0.0, rni = 0.0;
      const auto& yb = p.ylev[r.xb * cm.nm() + p.mlev[r.xb][k]];
      const auto& ya = p.ylev[r.xa * cm.nm() + p.mlev[r.xa][k]];
      const auto& yx = p.ylev[r.xb * cm.nm() + p.mlev[r.xa][k]];
      for (std::size_t j = 0; j < p.wy.size(); ++j) {
        auto bits = natural_bits(yb[j], ya[j], yx[j], r.ycut);
        if (bits.t) rt += p.wy[j];
        if (bits.nd) rnd += p.wy[j];
        if (bits.ni) rni += p.wy[j];
      }
      tc += p.wm[k] * rt;
      ndc += p.wm[k] * rnd;
      nic += p.wm[k] * rni;
    }
    t += wc * tc;
    nd += wc * ndc;
    ni += wc * nic;
    if (r.m) {
      double cdc = 0.0;
      const auto& yb = p.ylev[r.xb * cm.nm() + *r.m];
      const auto& ya = p.ylev[r.xa * cm.nm() + *r.m];
      for (std::size_t j = 0; j < p.wy.size(); ++j) {
        if (yb[j] < r.ycut && ya[j] >= r.ycut) cdc += p.wy[j];
      }
      cd += wc * cdc;
    }
  }
  TruthReport rep;
  rep.method = Method::exact;
  rep.values = {{"T-PNS", t, 0.0}, {"ND-PNS", nd, 0.0}, {"NI-PNS", ni, 0.0}};
  if (r.m) rep.values.push_back({"CD-PNS", cd, 0.0});
  return rep;
}

TruthReport exact_cd_evidence(const Scm& scm, const Query& q, const Evidence& e,
                              ZeroMassPolicy policy) {
  if (!q.m_fixed) throw UsageError("mediator-value evidence needs a fixed mediator level");
  Compiled cm(scm);
  Resolved r = resolve(scm, q);
  const std::size_t xs = scm.treatment_level_index(e.x_star().value());
  const std::size_t ms = scm.mediator_level_index(e.m_star()->value());
  const LevelRange yr = level_range(scm.outcome().levels, e.y_interval());
  const std::size_t m = *r.m;

  double num = 0.0, den = 0.0;
  std::vector<Partition> parts;
  for (std::size_t c : r.configs) {
    Partition p = build_partition(cm, c);
    double pm = 0.0;
    for (std::size_t k = 0; k < p.wm.size(); ++k) {
      if (p.mlev[xs][k] == ms) pm += p.wm[k];
    }
    if (pm == 0.0) {
      throw ConditioningError("evidence mediator level has probability zero under x*");
    }
    const double wc =
        r.marginal ? scm.covariate_prob(c) * treatment_prob(cm, c, xs) * pm : 1.0;
    const auto& yb = p.ylev[r.xb * cm.nm() + m];
    const auto& ya = p.ylev[r.xa * cm.nm() + m];
    const auto& ye = p.ylev[xs * cm.nm() + ms];
    double nc = 0.0, dc = 0.0;
    for (std::size_t j = 0; j < p.wy.size(); ++j) {
      if (!yr.contains(ye[j])) continue;
      dc += p.wy[j];
      if (yb[j] < r.ycut && ya[j] >= r.ycut) nc += p.wy[j];
    }
    num += wc * nc;
    den += wc * dc;
    parts.push_back(std::move(p));
  }

  TruthReport rep;
  rep.method = Method::exact;
  if (den > 0.0) {
    rep.case_flag = CaseFlag::A;
    rep.values.push_back({"CD-PNS", num / den, 0.0});
    return rep;
  }
  if (policy == ZeroMassPolicy::error || r.configs.size() != 1) {
    throw ConditioningError("evidence has probability zero");
  }
  // Boundary point in u_Y: first cell past {Y_{x*,m*} < y_l} in chain order.
  const Partition& p = parts.front();
  const std::size_t ly = scm.outcome().levels.size();
  std::vector<std::size_t> idx(p.wy.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::size_t> score(p.wy.size(), 0);
  for (std::size_t j = 0; j < p.wy.size(); ++j) {
    for (const auto& lev : p.ylev) score[j] += ly - 1 - lev[j];
  }
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  const auto& ye = p.ylev[xs * cm.nm() + ms];
  for (std::size_t j : idx) {
    if (ye[j] < yr.lo) continue;
    const auto& yb = p.ylev[r.xb * cm.nm() + m];
    const auto& ya = p.ylev[r.xa * cm.nm() + m];
    rep.case_flag = CaseFlag::B;
    rep.values.push_back(
        {"CD-PNS", yb[j] < r.ycut && ya[j] >= r.ycut ? 1.0 : 0.0, 0.0});
    return rep;
  }
  throw ConditioningError("evidence lies above every outcome the model can produce");
}

TruthReport exact_natural_evidence(const Scm& scm, const Query& q,
                                   const Evidence& e, ZeroMassPolicy policy) {
  Compiled cm(scm);
  Resolved r = resolve(scm, q);
  const std::size_t xs = scm.treatment_level_index(e.x_star().value());
  const LevelRange yr = level_range(scm.outcome().levels, e.y_interval());
  const bool with_m = e.kind() == EvidenceKind::mediator_interval;
  const LevelRange mr = with_m ? level_range(scm.mediator().levels, *e.m_interval())
                               : LevelRange{0, cm.nm()};

  auto in_evidence = [&](const Partition& p, std::size_t k, std::size_t j) {
    const std::size_t mx = p.mlev[xs][k];
    return mr.contains(mx) && yr.contains(p.ylev[xs * cm.nm() + mx][j]);
  };
  auto in_lower = [&](const Partition& p, std::size_t k, std::size_t j) {
    const std::size_t mx = p.mlev[xs][k];
    return mx < mr.lo || p.ylev[xs * cm.nm() + mx][j] < yr.lo;
  };

  double den = 0.0;
  std::array<double, 3> num{};
  std::vector<Partition> parts;
  for (std::size_t c : r.configs) {
    Partition p = build_partition(cm, c);
    const double wc =
        r.marginal ? scm.covariate_prob(c) * treatment_prob(cm, c, xs) : 1.0;
    double dc = 0.0;
    std::array<double, 3> nc{};
    for (std::size_t k = 0; k < p.wm.size(); ++k) {
      const auto& yb = p.ylev[r.xb * cm.nm() + p.mlev[r.xb][k]];
      const auto& ya = p.ylev[r.xa * cm.nm() + p.mlev[r.xa][k]];
      const auto& yx = p.ylev[r.xb * cm.nm() + p.mlev[r.xa][k]];
      double rd = 0.0;
      std::array<double, 3> rn{};
      for (std::size_t j = 0; j < p.wy.size(); ++j) {
        if (!in_evidence(p, k, j)) continue;
        rd += p.wy[j];
        auto bits = natural_bits(yb[j], ya[j], yx[j], r.ycut);
        if (bits.t) rn[0] += p.wy[j];
        if (bits.nd) rn[1] += p.wy[j];
        if (bits.ni) rn[2] += p.wy[j];
      }
      dc += p.wm[k] * rd;
      for (int i = 0; i < 3; ++i) nc[i] += p.wm[k] * rn[i];
    }
    den += wc * dc;
    for (int i = 0; i < 3; ++i) num[i] += wc * nc[i];
    parts.push_back(std::move(p));
  }

  TruthReport rep;
  rep.method = Method::exact;
  if (den > 0.0) {
    rep.case_flag = CaseFlag::A;
    rep.values = {{"T-PNS", num[0] / den, 0.0},
                  {"ND-PNS", num[1] / den, 0.0},
                  {"NI-PNS", num[2] / den, 0.0}};
    return rep;
  }
  if (policy == ZeroMassPolicy::error || r.configs.size() != 1) {
    throw ConditioningError("evidence has probability zero");
  }
  const Partition& p = parts.front();
  for (auto [k, j] : chain_order(p, cm, with_m)) {
    if (in_lower(p, k, j)) continue;
    const auto& yb = p.ylev[r.xb * cm.nm() + p.mlev[r.xb][k]];
    const auto& ya = p.ylev[r.xa * cm.nm() + p.mlev[r.xa][k]];
    const auto& yx = p.ylev[r.xb * cm.nm() + p.mlev[r.xa][k]];
    auto bits = natural_bits(yb[j], ya[j], yx[j], r.ycut);
    rep.case_flag = CaseFlag::B;
    rep.values = {{"T-PNS", bits.t ? 1.0 : 0.0, 0.0},
                  {"ND-PNS", bits.nd ? 1.0 : 0.0, 0.0},
                  {"NI-PNS", bits.ni ? 1.0 : 0.0, 0.0}};
    return rep;
  }
  throw ConditioningError("evidence lies above every outcome the model can produce");
}

}  // namespace

TruthReport truth_pns(const Scm& scm, const Query& q, const TruthMethod& method) {
  if (method.method == Method::monte_carlo) {
    return mc_truth<true>(scm, q, nullptr, method.samples, method.seed);
  }
  return exact_truth(scm, q);
}

TruthReport truth_with_evidence(const Scm& scm, const Query& q,
                                const Evidence& e, const TruthMethod& method,
                                ZeroMassPolicy policy) {
  if (method.method == Method::monte_carlo) {
    return mc_truth<true>(scm, q, &e, method.samples, method.seed);
  }
  if (e.kind() == EvidenceKind::mediator_value) {
    return exact_cd_evidence(scm, q, e, policy);
  }
  return exact_natural_evidence(scm, q, e, policy);
}

TruthReport truth_pns_serial(const Scm& scm, const Query& q,
                             std::uint64_t samples, std::uint64_t seed) {
  return mc_truth<false>(scm, q, nullptr, samples, seed);
}

TruthReport truth_with_evidence_serial(const Scm& scm, const Query& q,
                                       const Evidence& e, std::uint64_t samples,
                                       std::uint64_t seed) {
  return mc_truth<false>(scm, q, &e, samples, seed);
}

Effects effects(const Scm& scm, const Query& q) {
  Compiled cm(scm);
  Resolved r = resolve(scm, q);
  const auto& lv = scm.outcome().levels;
  double e_base = 0.0, e_alt = 0.0, e_alt_mbase = 0.0, e_base_malt = 0.0;
  double e_cd_alt = 0.0, e_cd_base = 0.0;
  for (std::size_t c : r.configs) {
    const double wc = r.marginal ? scm.covariate_prob(c) : 1.0;
    Partition p = build_partition(cm, c);
    for (std::size_t k = 0; k < p.wm.size(); ++k) {
      const std::size_t mb = p.mlev[r.xb][k];
      const std::size_t ma = p.mlev[r.xa][k];
      for (std::size_t j = 0; j < p.wy.size(); ++j) {
        const double w = wc * p.wm[k] * p.wy[j];
        e_base += w * lv[p.ylev[r.xb * cm.nm() + mb][j]];
        e_alt += w * lv[p.ylev[r.xa * cm.nm() + ma][j]];
        e_alt_mbase += w * lv[p.ylev[r.xa * cm.nm() + mb][j]];
        e_base_malt += w * lv[p.ylev[r.xb * cm.nm() + ma][j]];
      }
    }
    if (r.m) {
      for (std::size_t j = 0; j < p.wy.size(); ++j) {
        e_cd_alt += wc * p.wy[j] * lv[p.ylev[r.xa * cm.nm() + *r.m][j]];
        e_cd_base += wc * p.wy[j] * lv[p.ylev[r.xb * cm.nm() + *r.m][j]];
      }
    }
  }
  Effects out;
  out.te = e_alt - e_base;
  if (r.m) out.cde = e_cd_alt - e_cd_base;
  out.nde = e_alt_mbase - e_base;
  out.nie = e_base_malt - e_base;
  out.nie_reverse = e_alt_mbase - e_alt;
  return out;
}

// ---------------------------------------------------------------------------
// AnalyticCdf

namespace {

double width_of_level(const std::vector<Segment>& segs, std::size_t level) {
  double w = 0.0;
  for (const auto& s : segs) {
    if (s.level == level) w += s.hi - s.lo;
  }
  return w;
}

double outcome_cdf(const std::vector<Segment>& segs,
                   const std::vector<double>& levels, double y, Strictness s) {
  if (y == INFINITY) return 1.0;
  double w = 0.0;
  for (const auto& seg : segs) {
    const double v = levels[seg.level];
    if (s == Strictness::strict ? v < y : v <= y) w += seg.hi - seg.lo;
  }
  return w;
}

}  // namespace

AnalyticCdf::AnalyticCdf(const Scm& scm, std::vector<double> stratum)
    : scm_(scm) {
  if (!scm.discrete()) {
    throw UnsupportedSpecError("analytic CDFs need a discrete outcome");
  }
  if (stratum.empty() && !scm.covariates().empty()) {
    throw UnsupportedSpecError("analytic CDFs need a full covariate stratum");
  }
  cconf_ = stratum.empty() ? 0 : scm.covariate_config(stratum);
}

double AnalyticCdf::mediator_pmf(double m, double x) const {
  const std::size_t xi = scm_.treatment_level_index(x);
  if (width_of_level(scm_.treatment_segments(cconf_), xi) == 0.0) {
    throw PositivityError("treatment level " + format_number(x) +
                          " has probability zero");
  }
  const auto& lv = scm_.mediator().levels;
  auto it = std::find(lv.begin(), lv.end(), normalize_level(m));
  if (it == lv.end()) return 0.0;
  return width_of_level(scm_.mediator_segments(xi, cconf_),
                        static_cast<std::size_t>(it - lv.begin()));
}

std::vector<double> AnalyticCdf::mediator_support(double x) const {
  std::vector<double> out;
  for (double m : scm_.mediator().levels) {
    if (mediator_pmf(m, x) > 0.0) out.push_back(m);
  }
  return out;
}

double AnalyticCdf::cdf_y_given_xm(double y, double x, double m,
                                   Strictness s) const {
  if (mediator_pmf(m, x) == 0.0) {
    throw PositivityError("mediator level " + format_number(m) +
                          " has probability zero under X=" + format_number(x));
  }
  const std::size_t xi = scm_.treatment_level_index(x);
  const std::size_t mi = scm_.mediator_level_index(m);
  return outcome_cdf(scm_.outcome_segments(xi, mi, cconf_),
                     scm_.outcome().levels, y, s);
}

double AnalyticCdf::mix(double y, double x_outcome, double x_mediator,
                        Strictness s) const {
  double acc = 0.0;
  for (double m : mediator_support(x_mediator)) {
    acc += cdf_y_given_xm(y, x_outcome, m, s) * mediator_pmf(m, x_mediator);
  }
  return acc;
}

double AnalyticCdf::cdf_y_given_x(double y, double x, Strictness s) const {
  if (y == INFINITY) {
    mediator_pmf(0.0, x);  // positivity check
    return 1.0;
  }
  return mix(y, x, x, s);
}

double AnalyticCdf::rho(double y, double x_base, double x_alt) const {
  if (y == INFINITY) {
    mediator_pmf(0.0, x_base);
    mediator_pmf(0.0, x_alt);
    return 1.0;
  }
  return mix(y, x_base, x_alt, Strictness::strict);
}

double AnalyticCdf::joint_cdf_ym_given_x(double y, double m, double x,
                                         Strictness sy, Strictness sm) const {
  if (m == INFINITY) return cdf_y_given_x(y, x, sy);
  double acc = 0.0;
  for (double mv : mediator_support(x)) {
    if (!(sm == Strictness::strict ? mv < m : mv <= m)) continue;
    acc += cdf_y_given_xm(y, x, mv, sy) * mediator_pmf(mv, x);
  }
  return acc;
}

double AnalyticCdf::union_cdf_ym_given_x(double y, double m, double x) const {
  double acc = 0.0;
  for (double mv : mediator_support(x)) {
    const double pm = mediator_pmf(mv, x);
    acc += mv < m ? pm : cdf_y_given_xm(y, x, mv, Strictness::strict) * pm;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Monotonicity

namespace {

struct CellSet {
  std::vector<double> w;           // cell masses
  std::vector<std::vector<bool>> events;  // [event][cell]
  std::vector<std::string> names;
};

void chain_check(const CellSet& s, const std::string& assumption,
                 MonotonicityReport& rep, bool& flag) {
  for (std::size_t a = 0; a < s.events.size(); ++a) {
    for (std::size_t b = a + 1; b < s.events.size(); ++b) {
      double ab = 0.0, ba = 0.0;
      for (std::size_t i = 0; i < s.w.size(); ++i) {
        if (s.events[a][i] && !s.events[b][i]) ab += s.w[i];
        if (s.events[b][i] && !s.events[a][i]) ba += s.w[i];
      }
      if (ab > 0.0 && ba > 0.0) {
        flag = false;
        rep.violations.push_back(
            {assumption, s.names[a] + " and " + s.names[b] + " are not nested", ab, ba});
      }
    }
  }
}

std::string level_name(const std::vector<double>& lv, std::size_t i) {
  return format_number(lv[i]);
}

}  // namespace

MonotonicityReport check_monotonicity(const Scm& scm) {
  Compiled cm(scm);
  MonotonicityReport rep;
  const auto& xl = scm.treatment().levels;
  const auto& ml = scm.mediator().levels;
  const auto& yl = scm.outcome().levels;
  for (std::size_t c = 0; c < cm.nc(); ++c) {
    Partition p = build_partition(cm, c);
    const std::string cs = cm.nc() > 1 ? " in stratum " + std::to_string(c) : "";

    // Controlled family over u_Y.
    CellSet ctl;
    ctl.w = p.wy;
    for (std::size_t a = 0; a < cm.nx(); ++a) {
      for (std::size_t m = 0; m < cm.nm(); ++m) {
        for (std::size_t t = 1; t < yl.size(); ++t) {
          std::vector<bool> ev(p.wy.size());
          for (std::size_t j = 0; j < p.wy.size(); ++j) ev[j] = p.ylev[a * cm.nm() + m][j] < t;
          ctl.events.push_back(std::move(ev));
          ctl.names.push_back("{Y_{" + level_name(xl, a) + "," + level_name(ml, m) +
                              "} < " + level_name(yl, t) + "}" + cs);
        }
      }
    }
    chain_check(ctl, "4", rep, rep.assumption4);
    for (std::size_t m = 0; m < cm.nm(); ++m) {
      for (std::size_t t = 1; t < yl.size(); ++t) {
        for (std::size_t a = 0; a < cm.nx(); ++a) {
          for (std::size_t b = a + 1; b < cm.nx(); ++b) {
            double ab = 0.0, ba = 0.0;
            for (std::size_t j = 0; j < p.wy.size(); ++j) {
              const std::size_t la = p.ylev[a * cm.nm() + m][j];
              const std::size_t lb = p.ylev[b * cm.nm() + m][j];
              if (la < t && lb >= t) ab += p.wy[j];
              if (lb < t && la >= t) ba += p.wy[j];
            }
            if (ab > 0.0 && ba > 0.0) {
              rep.assumption4_prime = false;
              rep.violations.push_back(
                  {"4'", "Y_{" + level_name(xl, a) + "," + level_name(ml, m) + "} and Y_{" +
                             level_name(xl, b) + "," + level_name(ml, m) + "} cross at " +
                             level_name(yl, t) + cs,
                   ab, ba});
            }
          }
        }
      }
    }

    // Natural family over (u_M, u_Y).
    CellSet nat;
    for (std::size_t k = 0; k < p.wm.size(); ++k) {
      for (std::size_t j = 0; j < p.wy.size(); ++j) nat.w.push_back(p.wm[k] * p.wy[j]);
    }
    auto ynat = [&](std::size_t a, std::size_t b, std::size_t k, std::size_t j) {
      return p.ylev[a * cm.nm() + p.mlev[b][k]][j];
    };
    for (std::size_t a = 0; a < cm.nx(); ++a) {
      for (std::size_t b = 0; b < cm.nx(); ++b) {
        for (std::size_t t = 1; t < yl.size(); ++t) {
          std::vector<bool> ev;
          for (std::size_t k = 0; k < p.wm.size(); ++k) {
            for (std::size_t j = 0; j < p.wy.size(); ++j) ev.push_back(ynat(a, b, k, j) < t);
          }
          nat.events.push_back(std::move(ev));
          nat.names.push_back("{Y_{" + level_name(xl, a) + ",M_" + level_name(xl, b) +
                              "} < " + level_name(yl, t) + "}" + cs);
        }
      }
    }
    chain_check(nat, "5", rep, rep.assumption5);
    for (std::size_t t = 1; t < yl.size(); ++t) {
      for (std::size_t i1 = 0; i1 < cm.nx() * cm.nx(); ++i1) {
        for (std::size_t i2 = i1 + 1; i2 < cm.nx() * cm.nx(); ++i2) {
          const std::size_t a1 = i1 / cm.nx(), b1 = i1 % cm.nx();
          const std::size_t a2 = i2 / cm.nx(), b2 = i2 % cm.nx();
          double ab = 0.0, ba = 0.0;
          for (std::size_t k = 0; k < p.wm.size(); ++k) {
            for (std::size_t j = 0; j < p.wy.size(); ++j) {
              const std::size_t l1 = ynat(a1, b1, k, j);
              const std::size_t l2 = ynat(a2, b2, k, j);
              const double w = p.wm[k] * p.wy[j];
              if (l1 < t && l2 >= t) ab += w;
              if (l2 < t && l1 >= t) ba += w;
            }
          }
          if (ab > 0.0 && ba > 0.0) {
            rep.assumption5_prime = false;
            rep.violations.push_back(
                {"5'", "Y_{" + level_name(xl, a1) + ",M_" + level_name(xl, b1) + "} and Y_{" +
                           level_name(xl, a2) + ",M_" + level_name(xl, b2) + "} cross at " +
                           level_name(yl, t) + cs,
                 ab, ba});
          }
        }
      }
    }

    CellSet lex = nat;
    for (std::size_t b = 0; b < cm.nx(); ++b) {
      for (std::size_t s = 1; s < ml.size(); ++s) {
        std::vector<bool> ev;
        for (std::size_t k = 0; k < p.wm.size(); ++k) {
          for (std::size_t j = 0; j < p.wy.size(); ++j) ev.push_back(p.mlev[b][k] < s);
        }
        lex.events.push_back(std::move(ev));
        lex.names.push_back("{M_" + level_name(xl, b) + " < " + level_name(ml, s) + "}" + cs);
      }
    }
    bool a1 = true;
    MonotonicityReport scratch;
    chain_check(lex, "A1", scratch, a1);
    if (!a1) {
      rep.assumption_a1 = false;
      for (auto& v : scratch.violations) {
        if (v.detail.find("{M_") != std::string::npos) rep.violations.push_back(v);
      }
    }
  }
  return rep;
}

}  // namespace medpoc
