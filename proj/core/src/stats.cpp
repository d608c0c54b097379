#include "paudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace paudit {

namespace {

// Lentz's continued fraction for the incomplete beta function.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  const double x = df / (df + t * t);
  double p = incomplete_beta(df / 2.0, 0.5, x);
  return std::clamp(p, 0.0, 1.0);
}

double normal_two_sided_p(double z) {
  if (!std::isfinite(z)) return 0.0;
  return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("pearson: length mismatch");
  }
  const int n = static_cast<int>(x.size());
  if (n < 3) throw std::invalid_argument("pearson: need n >= 3");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::invalid_argument("pearson: constant input");
  }
  double r = sxy / std::sqrt(sxx * syy);
  r = std::clamp(r, -1.0, 1.0);
  PearsonResult out;
  out.r = r;
  out.n = n;
  if (std::fabs(r) >= 1.0) {
    out.p = 0.0;
  } else {
    const double df = n - 2;
    const double t = r * std::sqrt(df / (1.0 - r * r));
    out.p = student_t_two_sided_p(t, df);
  }
  return out;
}

double cohens_d(std::span<const double> values, std::span<const int> group) {
  if (values.size() != group.size()) {
    throw std::invalid_argument("cohens_d: length mismatch");
  }
  double sum1 = 0.0, sum0 = 0.0;
  long n1 = 0, n0 = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (group[i] == 1) {
      sum1 += values[i];
      ++n1;
    } else if (group[i] == 0) {
      sum0 += values[i];
      ++n0;
    } else {
      throw std::invalid_argument("cohens_d: group entries must be 0/1");
    }
  }
  if (n1 == 0 || n0 == 0) {
    throw std::invalid_argument("cohens_d: both groups must be non-empty");
  }
  const double m1 = sum1 / n1;
  const double m0 = sum0 / n0;
  double ss1 = 0.0, ss0 = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - (group[i] == 1 ? m1 : m0);
    if (group[i] == 1) {
      ss1 += d * d;
    } else {
      ss0 += d * d;
    }
  }
  const double pooled_var = (ss1 + ss0) / double(n1 + n0 - 2);
  if (pooled_var <= 0.0) {
    throw std::invalid_argument("cohens_d: zero pooled variance");
  }
  return (m1 - m0) / std::sqrt(pooled_var);
}

LogisticResult logistic_wald_p(std::span<const double> feature,
                               std::span<const int> label) {
  if (feature.size() != label.size()) {
    throw std::invalid_argument("logistic: length mismatch");
  }
  const int n = static_cast<int>(feature.size());
  long ones = 0;
  for (int v : label) {
    if (v != 0 && v != 1) {
      throw std::invalid_argument("logistic: labels must be 0/1");
    }
    ones += v;
  }
  if (ones == 0 || ones == n) {
    throw std::invalid_argument("logistic: label has a single class");
  }
  {
    const double first = feature[0];
    bool constant = true;
    for (double v : feature) {
      if (v != first) {
        constant = false;
        break;
      }
    }
    if (constant) throw std::invalid_argument("logistic: constant feature");
  }

  constexpr int kMaxIter = 25;
  constexpr double kGradTol = 1e-8;
  constexpr double kSeparationSlope = 20.0;

  double b0 = 0.0, b1 = 0.0;
  double h00 = 0.0, h01 = 0.0, h11 = 0.0;
  LogisticResult out;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    double g0 = 0.0, g1 = 0.0;
    h00 = h01 = h11 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double eta = b0 + b1 * feature[i];
      const double mu = 1.0 / (1.0 + std::exp(-eta));
      const double w = mu * (1.0 - mu);
      const double resid = label[i] - mu;
      g0 += resid;
      g1 += resid * feature[i];
      h00 += w;
      h01 += w * feature[i];
      h11 += w * feature[i] * feature[i];
    }
    out.iterations = iter + 1;
    if (std::sqrt(g0 * g0 + g1 * g1) < kGradTol) {
      out.converged = true;
      break;
    }
    const double det = h00 * h11 - h01 * h01;
    if (!(det > 0.0) || !std::isfinite(det)) break;
    // Newton step: beta += H^-1 g
    b0 += (h11 * g0 - h01 * g1) / det;
    b1 += (h00 * g1 - h01 * g0) / det;
  }
  out.slope = b1;
  out.intercept = b0;
  if (std::fabs(b1) > kSeparationSlope) out.converged = false;

  const double det = h00 * h11 - h01 * h01;
  if (det > 0.0 && std::isfinite(det)) {
    out.slope_se = std::sqrt(h00 / det);
    out.p = normal_two_sided_p(b1 / out.slope_se);
  } else {
    out.slope_se = std::numeric_limits<double>::infinity();
    out.p = 1.0;
  }
  return out;
}

EffectResult effect_with_significance(const std::string& feature_id,
                                      std::span<const double> feature,
                                      std::span<const double> factor_values,
                                      FactorKind kind) {
  EffectResult res;
  res.feature = feature_id;
  res.n = static_cast<int>(feature.size());
  try {
    if (kind == FactorKind::continuous) {
      const auto pr = pearson(feature, factor_values);
      res.effect = pr.r;
      res.raw_p = pr.p;
    } else {
      std::vector<int> group(factor_values.size());
      for (std::size_t i = 0; i < factor_values.size(); ++i) {
        group[i] = factor_values[i] != 0.0 ? 1 : 0;
      }
      res.effect = cohens_d(feature, group);
      const auto lr = logistic_wald_p(feature, group);
      res.raw_p = lr.p;
      res.converged = lr.converged;
    }
  } catch (const std::invalid_argument&) {
    res.skipped = true;
    res.effect = 0.0;
    res.raw_p = 1.0;
  }
  return res;
}

BhResult bh_fdr(const std::vector<double>& raw_p, double alpha) {
  const std::size_t m = raw_p.size();
  for (double p : raw_p) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("bh_fdr: p-value outside [0, 1]");
    }
  }
  BhResult out;
  out.reject.assign(m, false);
  out.adjusted.assign(m, 1.0);
  if (m == 0) return out;

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return raw_p[a] < raw_p[b];
  });

  // Step-up: largest k with p_(k) <= k * alpha / m.
  std::size_t k_star = 0;
  for (std::size_t k = m; k >= 1; --k) {
    if (raw_p[order[k - 1]] <= double(k) * alpha / double(m)) {
      k_star = k;
      break;
    }
  }
  for (std::size_t k = 0; k < k_star; ++k) out.reject[order[k]] = true;

  double running = 1.0;
  for (std::size_t k = m; k >= 1; --k) {
    const double candidate = raw_p[order[k - 1]] * double(m) / double(k);
    running = std::min(running, candidate);
    out.adjusted[order[k - 1]] = std::min(running, 1.0);
  }
  return out;
}

void apply_bh(EffectTable& table) {
  std::vector<std::size_t> idx;
  std::vector<double> raw;
  for (std::size_t i = 0; i < table.results.size(); ++i) {
    if (!table.results[i].skipped) {
      idx.push_back(i);
      raw.push_back(table.results[i].raw_p);
    }
  }
  const auto bh = bh_fdr(raw, table.alpha);
  for (std::size_t j = 0; j < idx.size(); ++j) {
    table.results[idx[j]].adjusted_p = bh.adjusted[j];
    table.results[idx[j]].significant = bh.reject[j];
  }
  table.vocab_size = static_cast<int>(idx.size());
}

std::string EffectTable::to_csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "feature,effect,raw_p,adjusted_p,significant,n,converged\n";
  for (const auto& r : results) {
    if (r.skipped) continue;
    std::string feature = r.feature;
    // Quote features containing the delimiter (comma is a valid token).
    if (feature.find(',') != std::string::npos ||
        feature.find('"') != std::string::npos) {
      std::string quoted = "\"";
      for (char c : feature) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      quoted += '"';
      feature = quoted;
    }
    os << feature << ',' << r.effect << ',' << r.raw_p << ',' << r.adjusted_p
       << ',' << (r.significant ? 1 : 0) << ',' << r.n << ','
       << (r.converged ? 1 : 0) << '\n';
  }
  return os.str();
}

MetaCorrelation correlate_effect_vectors(const EffectTable& a,
                                         const EffectTable& b,
                                         Alignment alignment,
                                         int min_overlap) {
  std::unordered_map<std::string, double> ea, eb;
  for (const auto& r : a.results) {
    if (!r.skipped) ea[r.feature] = r.effect;
  }
  for (const auto& r : b.results) {
    if (!r.skipped) eb[r.feature] = r.effect;
  }
  std::vector<std::string> keys;
  if (alignment == Alignment::intersection) {
    for (const auto& [k, v] : ea) {
      if (eb.count(k)) keys.push_back(k);
    }
  } else {
    for (const auto& [k, v] : ea) keys.push_back(k);
    for (const auto& [k, v] : eb) {
      if (!ea.count(k)) keys.push_back(k);
    }
  }
  std::sort(keys.begin(), keys.end());
  if (static_cast<int>(keys.size()) < min_overlap) {
    throw std::runtime_error(
        "correlate_effect_vectors: only " + std::to_string(keys.size()) +
        " aligned features (need " + std::to_string(min_overlap) + ")");
  }
  std::vector<double> va, vb;
  va.reserve(keys.size());
  vb.reserve(keys.size());
  for (const auto& k : keys) {
    auto ia = ea.find(k);
    auto ib = eb.find(k);
    va.push_back(ia != ea.end() ? ia->second : 0.0);
    vb.push_back(ib != eb.end() ? ib->second : 0.0);
  }
  const auto pr = pearson(va, vb);
  MetaCorrelation out;
  out.r = pr.r;
  out.p = pr.p;
  out.aligned = static_cast<int>(keys.size());
  return out;
}

std::optional<double> fleiss_kappa(
    const std::vector<std::vector<int>>& counts) {
  if (counts.empty()) throw std::invalid_argument("fleiss_kappa: no items");
  const std::size_t categories = counts[0].size();
  long raters = std::accumulate(counts[0].begin(), counts[0].end(), 0L);
  if (raters < 2) throw std::invalid_argument("fleiss_kappa: need >= 2 raters");
  const double n_items = double(counts.size());

  double p_bar = 0.0;
  std::vector<double> category_share(categories, 0.0);
  for (const auto& row : counts) {
    if (row.size() != categories) {
      throw std::invalid_argument("fleiss_kappa: ragged count matrix");
    }
    long row_total = 0;
    double agree = 0.0;
    for (std::size_t j = 0; j < categories; ++j) {
      row_total += row[j];
      agree += double(row[j]) * double(row[j] - 1);
      category_share[j] += row[j];
    }
    if (row_total != raters) {
      throw std::invalid_argument("fleiss_kappa: unequal raters per item");
    }
    p_bar += agree / (double(raters) * double(raters - 1));
  }
  p_bar /= n_items;
  double p_e = 0.0;
  for (double share : category_share) {
    const double pj = share / (n_items * double(raters));
    p_e += pj * pj;
  }
  if (1.0 - p_e <= 0.0) return std::nullopt;
  return (p_bar - p_e) / (1.0 - p_e);
}

PairwiseKappaResult average_pairwise_kappa(
    const std::vector<std::vector<int>>& ratings_a,
    const std::vector<std::vector<int>>& ratings_b) {
  if (ratings_a.empty() || ratings_b.empty()) {
    throw std::invalid_argument("average_pairwise_kappa: empty ratings");
  }
  const std::size_t posts = ratings_a[0].size();
  for (const auto& row : ratings_a) {
    if (row.size() != posts) {
      throw std::invalid_argument("average_pairwise_kappa: ragged table A");
    }
  }
  for (const auto& row : ratings_b) {
    if (row.size() != posts) {
      throw std::invalid_argument(
          "average_pairwise_kappa: tables rate different posts");
    }
  }
  PairwiseKappaResult out;
  double sum = 0.0;
  std::vector<std::vector<int>> counts;
  for (const auto& ra : ratings_a) {
    for (const auto& rb : ratings_b) {
      ++out.total_pairs;
      counts.clear();
      for (std::size_t i = 0; i < posts; ++i) {
        if (ra[i] < 0 || rb[i] < 0) continue;  // missing
        std::vector<int> row(2, 0);
        ++row[ra[i]];
        ++row[rb[i]];
        counts.push_back(std::move(row));
      }
      if (counts.empty()) continue;
      const auto k = fleiss_kappa(counts);
      if (k) {
        sum += *k;
        ++out.defined_pairs;
      }
    }
  }
  if (out.defined_pairs == 0) {
    throw std::runtime_error(
        "average_pairwise_kappa: no defined pairs (0 of " +
        std::to_string(out.total_pairs) + ")");
  }
  out.mean = sum / out.defined_pairs;
  return out;
}

}  // namespace paudit
