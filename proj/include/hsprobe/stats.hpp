#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace hsprobe::stats {

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double reg_inc_beta(double a, double b, double x);

/// Two-sided Student t tail P(|T| >= |t|).
double t_sf(double t, double df);

/// Upper tail of F(d1, d2).
double f_sf(double f, double d1, double d2);

enum class Center { kMean, kMedian };

struct LeveneResult {
  double statistic = 0.0;
  double p = 1.0;
  double df1 = 1.0;
  double df2 = 0.0;
  bool equal_variances = true;
  /// Every absolute deviation equals its group mean; W reported as 0, p 1.
  bool degenerate = false;
};

LeveneResult levene_test(std::span<const double> a, std::span<const double> b,
                         Center center = Center::kMean, double alpha = 0.05);

enum class TTestVariant { kStudent, kWelch, kPaired };

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  /// Both samples constant (zero standard error).
  bool degenerate = false;
};

TTestResult t_test(std::span<const double> a, std::span<const double> b,
                   TTestVariant variant);

struct NormalityResult {
  double statistic = 0.0;
  double p = 1.0;
  bool pass = true;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  /// Constant sample; moments undefined, pass = false.
  bool degenerate = false;
  /// Fewer than 8 observations; the chi-square approximation is poor.
  bool small_sample = false;
};

/// Jarque-Bera from population skewness and excess kurtosis, p from the
/// chi-square(2) tail.
NormalityResult normality_check(std::span<const double> sample,
                                double alpha = 0.05);

struct SamplePair {
  std::vector<double> a;
  std::vector<double> b;
  std::string description;

  void validate() const;
};

struct PipelineOptions {
  double alpha = 0.05;
  double headline_alpha = 0.001;
  Center center = Center::kMean;
  /// Sensitivity mode: paired t-test instead of the Levene-gated choice.
  bool paired = false;
};

struct TestReport {
  std::string description;
  NormalityResult normality_a;
  NormalityResult normality_b;
  LeveneResult levene;
  TTestVariant chosen_test = TTestVariant::kStudent;
  TTestResult test;
  double alpha = 0.05;
  double headline_alpha = 0.001;
  bool reject_at_alpha = false;
  bool reject_at_headline = false;
  std::vector<std::string> warnings;
};

/// Normality (recorded, non-blocking) -> Levene -> Student or Welch.
TestReport hypothesis_pipeline(const SamplePair& pair,
                               const PipelineOptions& options = {});

std::string to_string(TTestVariant v);
std::string to_string(Center c);

nlohmann::json to_json(const LeveneResult& r);
nlohmann::json to_json(const TTestResult& r);
nlohmann::json to_json(const NormalityResult& r);
nlohmann::json to_json(const TestReport& r);

}  // namespace hsprobe::stats
