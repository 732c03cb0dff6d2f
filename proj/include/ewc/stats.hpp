#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ewc {

// Kahan-compensated running sum; used wherever replicate values are folded in
// a fixed order.
class KahanSum {
  public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct MomentEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::int64_t replicates = 0;
    std::optional<double> target;   // exact finite-n value when available
    std::optional<double> z_score;  // (mean - target) / SE
    std::optional<double> limit;    // asymptotic value, for trend reporting
};

// Mean and standard error of a replicate vector, in index order.
MomentEstimate summarize(std::span<const double> values);
MomentEstimate summarize(std::span<const double> values, double target);

struct ShapeReport {
    std::int64_t replicates = 0;
    double skewness = 0.0;
    double skew_se = 0.0;       // jackknife
    double skew_z = 0.0;
    double excess_kurtosis = 0.0;
    double kurt_se = 0.0;       // jackknife
    double kurt_z = 0.0;
    bool degenerate = false;    // (near-)zero variance sample
};

// Sample skewness and excess kurtosis with leave-one-out jackknife standard
// errors, computed from power sums in O(R).
ShapeReport shape_statistics(std::span<const double> values);

struct KSResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::int64_t n1 = 0;
    std::int64_t n2 = 0;
    bool degenerate = false;  // both samples constant and equal
};

// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
double kolmogorov_q(double lambda);

// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value (small-sample
// effective-size correction applied to the argument of Q).
KSResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace ewc
