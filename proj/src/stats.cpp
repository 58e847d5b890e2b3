#include "hsprobe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hsprobe/error.hpp"

namespace hsprobe::stats {
namespace {

using nlohmann::json;

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Unbiased sample variance, two-pass.
double variance_of(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

double median_of(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  return n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 100000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) return h;
  }
  throw DomainError("incomplete beta continued fraction did not converge");
}

void require_size(std::span<const double> s, std::size_t n, const char* what) {
  if (s.size() < n) {
    throw DomainError(std::string(what) + " needs at least " + std::to_string(n) +
                      " observations, got " + std::to_string(s.size()));
  }
}

}  // namespace

double reg_inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw DomainError("reg_inc_beta outside its domain");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::clamp(front * beta_continued_fraction(a, b, x) / a, 0.0, 1.0);
  }
  return std::clamp(1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b, 0.0, 1.0);
}

double t_sf(double t, double df) {
  if (!(df > 0.0)) throw DomainError("t distribution needs df > 0");
  if (std::isnan(t)) throw DomainError("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  return reg_inc_beta(0.5 * df, 0.5, df / (df + t * t));
}

double f_sf(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw DomainError("F distribution needs positive df");
  if (std::isnan(f)) throw DomainError("F statistic is NaN");
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return reg_inc_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f));
}

LeveneResult levene_test(std::span<const double> a, std::span<const double> b,
                         Center center, double alpha) {
  require_size(a, 3, "Levene test");
  require_size(b, 3, "Levene test");
  auto deviations = [center](std::span<const double> s) {
    const double c = center == Center::kMean ? mean_of(s) : median_of(s);
    std::vector<double> z;
    z.reserve(s.size());
    for (double x : s) z.push_back(std::fabs(x - c));
    return z;
  };
  const auto za = deviations(a), zb = deviations(b);
  const double na = static_cast<double>(za.size()), nb = static_cast<double>(zb.size());
  const double n = na + nb;
  const double ma = mean_of(za), mb = mean_of(zb);
  const double grand = (na * ma + nb * mb) / n;
  const double between = na * (ma - grand) * (ma - grand) + nb * (mb - grand) * (mb - grand);
  double within = 0.0;
  for (double z : za) within += (z - ma) * (z - ma);
  for (double z : zb) within += (z - mb) * (z - mb);

  LeveneResult r;
  r.df1 = 1.0;
  r.df2 = n - 2.0;
  if (within == 0.0) {
    r.degenerate = true;
    r.statistic = 0.0;
    r.p = 1.0;
  } else {
    r.statistic = (n - 2.0) * between / within;
    r.p = f_sf(r.statistic, r.df1, r.df2);
  }
  r.equal_variances = r.p >= alpha;
  return r;
}

TTestResult t_test(std::span<const double> a, std::span<const double> b,
                   TTestVariant variant) {
  require_size(a, 2, "t-test");
  require_size(b, 2, "t-test");
  TTestResult r;
  double diff = 0.0, se = 0.0;
  if (variant == TTestVariant::kPaired) {
    if (a.size() != b.size()) throw DomainError("paired t-test needs equal sizes");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    diff = mean_of(d);
    const double n = static_cast<double>(d.size());
    se = std::sqrt(variance_of(d, diff) / n);
    r.df = n - 1.0;
  } else {
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double ma = mean_of(a), mb = mean_of(b);
    const double va = variance_of(a, ma), vb = variance_of(b, mb);
    diff = ma - mb;
    if (variant == TTestVariant::kStudent) {
      const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
      se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
      r.df = na + nb - 2.0;
    } else {
      const double qa = va / na, qb = vb / nb;
      se = std::sqrt(qa + qb);
      const double denom = qa * qa / (na - 1.0) + qb * qb / (nb - 1.0);
      r.df = denom > 0.0 ? (qa + qb) * (qa + qb) / denom : na + nb - 2.0;
    }
  }
  if (se == 0.0) {
    r.degenerate = true;
    if (diff == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), diff);
      r.p = 0.0;
    }
    return r;
  }
  r.t = diff / se;
  r.p = t_sf(r.t, r.df);
  return r;
}

NormalityResult normality_check(std::span<const double> sample, double alpha) {
  require_size(sample, 3, "normality check");
  NormalityResult r;
  const double n = static_cast<double>(sample.size());
  r.small_sample = sample.size() < 8;
  const double m = mean_of(sample);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : sample) {
    const double d = x - m;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 == 0.0) {
    r.degenerate = true;
    r.pass = false;
    r.p = 0.0;
    return r;
  }
  r.skewness = m3 / std::pow(m2, 1.5);
  r.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  r.statistic = n / 6.0 *
                (r.skewness * r.skewness + r.excess_kurtosis * r.excess_kurtosis / 4.0);
  r.p = std::exp(-0.5 * r.statistic);
  r.pass = r.p >= alpha;
  return r;
}

void SamplePair::validate() const {
  if (a.size() < 3 || b.size() < 3) {
    throw InsufficientDataError("sample pair '" + description +
                                "' needs at least 3 observations per sample");
  }
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite(a) || !finite(b)) {
    throw ValidationError("sample pair '" + description + "' has non-finite values");
  }
}

TestReport hypothesis_pipeline(const SamplePair& pair, const PipelineOptions& options) {
  pair.validate();
  TestReport r;
  r.description = pair.description;
  r.alpha = options.alpha;
  r.headline_alpha = options.headline_alpha;
  r.normality_a = normality_check(pair.a, options.alpha);
  r.normality_b = normality_check(pair.b, options.alpha);
  using Named = std::pair<const char*, const NormalityResult*>;
  for (const auto& [name, n] : {Named{"a", &r.normality_a}, Named{"b", &r.normality_b}}) {
    if (n->degenerate) {
      r.warnings.push_back(std::string("sample ") + name + " is constant");
    } else if (!n->pass) {
      r.warnings.push_back(std::string("sample ") + name +
                           " fails the Jarque-Bera normality check");
    }
    if (n->small_sample) {
      r.warnings.push_back(std::string("sample ") + name +
                           " has fewer than 8 observations");
    }
  }
  r.levene = levene_test(pair.a, pair.b, options.center, options.alpha);
  if (options.paired) {
    r.chosen_test = TTestVariant::kPaired;
  } else {
    r.chosen_test = r.levene.equal_variances ? TTestVariant::kStudent : TTestVariant::kWelch;
  }
  r.test = t_test(pair.a, pair.b, r.chosen_test);
  if (r.test.degenerate) r.warnings.push_back("zero standard error");
  r.reject_at_alpha = r.test.p < options.alpha;
  r.reject_at_headline = r.test.p < options.headline_alpha;
  return r;
}

std::string to_string(TTestVariant v) {
  switch (v) {
    case TTestVariant::kStudent: return "student";
    case TTestVariant::kWelch: return "welch";
    case TTestVariant::kPaired: return "paired";
  }
  return "unknown";
}

std::string to_string(Center c) { return c == Center::kMean ? "mean" : "median"; }

namespace {
// JSON has no infinity; report it as a string.
json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}
}  // namespace

json to_json(const LeveneResult& r) {
  return {{"statistic", number(r.statistic)}, {"p", r.p},
          {"df1", r.df1}, {"df2", r.df2},
          {"equal_variances", r.equal_variances}, {"degenerate", r.degenerate}};
}

json to_json(const TTestResult& r) {
  return {{"t", number(r.t)}, {"df", r.df}, {"p", r.p}, {"degenerate", r.degenerate}};
}

json to_json(const NormalityResult& r) {
  return {{"test", "jarque_bera"}, {"statistic", r.statistic}, {"p", r.p},
          {"pass", r.pass}, {"skewness", r.skewness},
          {"excess_kurtosis", r.excess_kurtosis}, {"degenerate", r.degenerate},
          {"small_sample", r.small_sample}};
}

json to_json(const TestReport& r) {
  return {{"description", r.description},
          {"normality", {{"a", to_json(r.normality_a)}, {"b", to_json(r.normality_b)}}},
          {"levene", to_json(r.levene)},
          {"chosen_test", to_string(r.chosen_test)},
          {"t_test", to_json(r.test)},
          {"alpha", r.alpha},
          {"headline_alpha", r.headline_alpha},
          {"reject_at_alpha", r.reject_at_alpha},
          {"reject_at_headline", r.reject_at_headline},
          {"warnings", r.warnings}};
}

}  // namespace hsprobe::stats
