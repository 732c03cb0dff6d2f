#include "ewc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ewc {

MomentEstimate summarize(std::span<const double> values) {
    if (values.size() < 2) throw std::invalid_argument("summarize: need at least 2 replicates");
    const auto R = static_cast<std::int64_t>(values.size());
    KahanSum s;
    for (double v : values) s.add(v);
    const double mean = s.value() / static_cast<double>(R);
    KahanSum sq;
    for (double v : values) sq.add((v - mean) * (v - mean));
    const double var = sq.value() / static_cast<double>(R - 1);
    MomentEstimate e;
    e.mean = mean;
    e.standard_error = std::sqrt(std::max(0.0, var) / static_cast<double>(R));
    e.replicates = R;
    return e;
}

MomentEstimate summarize(std::span<const double> values, double target) {
    MomentEstimate e = summarize(values);
    e.target = target;
    e.z_score = e.standard_error > 0.0
                    ? (e.mean - target) / e.standard_error
                    : (e.mean == target ? 0.0 : std::numeric_limits<double>::infinity());
    return e;
}

ShapeReport shape_statistics(std::span<const double> values) {
    const auto R = static_cast<std::int64_t>(values.size());
    if (R < 4) throw std::invalid_argument("shape_statistics: need at least 4 replicates");
    const double dR = static_cast<double>(R);

    KahanSum s1k;
    for (double v : values) s1k.add(v);
    const double mean = s1k.value() / dR;

    // centered power sums (centering once keeps the leave-one-out updates stable)
    KahanSum c2, c3, c4;
    for (double v : values) {
        const double d = v - mean;
        const double d2 = d * d;
        c2.add(d2);
        c3.add(d2 * d);
        c4.add(d2 * d2);
    }
    const double S2 = c2.value(), S3 = c3.value(), S4 = c4.value();

    auto skew_kurt = [](double n, double s2, double s3, double s4) {
        const double m2 = s2 / n;
        const double m3 = s3 / n;
        const double m4 = s4 / n;
        const double skew = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
        const double kurt = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
        return std::pair<double, double>(skew, kurt);
    };

    ShapeReport rep;
    rep.replicates = R;
    const double var = S2 / dR;
    if (!(var > 0.0) || var < 1e-300) {
        rep.degenerate = true;
        return rep;
    }
    auto [g1, g2] = skew_kurt(dR, S2, S3, S4);
    rep.skewness = g1;
    rep.excess_kurtosis = g2;

    // Leave-one-out jackknife from the centered power sums. Removing x_i moves
    // the mean by -d_i/(R-1), so the remaining deltas shift by t = d_i/(R-1);
    // the shifted power sums follow from the binomial expansion.
    KahanSum j1_sum, j2_sum, j1_sq, j2_sq;
    std::vector<double> skew_loo(values.size()), kurt_loo(values.size());
    const double nm1 = dR - 1.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - mean;
        const double t = d / nm1;
        const double s1r = -d;  // sum of deltas over j != i
        const double s2 = S2 - d * d;
        const double s3 = S3 - d * d * d;
        const double s4 = S4 - d * d * d * d;
        const double r2 = s2 + 2.0 * t * s1r + nm1 * t * t;
        const double r3 = s3 + 3.0 * t * s2 + 3.0 * t * t * s1r + nm1 * t * t * t;
        const double r4 = s4 + 4.0 * t * s3 + 6.0 * t * t * s2 + 4.0 * t * t * t * s1r +
                          nm1 * t * t * t * t;
        auto [sk, ku] = skew_kurt(nm1, r2, r3, r4);
        skew_loo[i] = sk;
        kurt_loo[i] = ku;
        j1_sum.add(sk);
        j2_sum.add(ku);
    }
    const double j1_mean = j1_sum.value() / dR;
    const double j2_mean = j2_sum.value() / dR;
    for (std::size_t i = 0; i < values.size(); ++i) {
        j1_sq.add((skew_loo[i] - j1_mean) * (skew_loo[i] - j1_mean));
        j2_sq.add((kurt_loo[i] - j2_mean) * (kurt_loo[i] - j2_mean));
    }
    rep.skew_se = std::sqrt(std::max(0.0, nm1 / dR * j1_sq.value()));
    rep.kurt_se = std::sqrt(std::max(0.0, nm1 / dR * j2_sq.value()));
    rep.skew_z = rep.skew_se > 0.0 ? rep.skewness / rep.skew_se : 0.0;
    rep.kurt_z = rep.kurt_se > 0.0 ? rep.excess_kurtosis / rep.kurt_se : 0.0;
    return rep;
}

double kolmogorov_q(double lambda) {
    // two-regime evaluation: theta-function form for small lambda where the
    // alternating series is useless, the series itself elsewhere
    const double u = std::abs(lambda);
    if (u < 0.2) return 1.0;
    if (u < 0.755) {
        const double v = 1.0 / (u * u);
        const double w = 2.50662827;  // sqrt(2 pi)
        // -pi^2/8, -9 pi^2/8, -25 pi^2/8
        return std::clamp(1.0 - w *
                                    (std::exp(-1.2337005501361697 * v) +
                                     std::exp(-11.103304951225528 * v) +
                                     std::exp(-30.842513753404244 * v)) /
                                    u,
                          0.0, 1.0);
    }
    if (u >= 6.8116) return 0.0;
    const double v = u * u;
    double sum = 0.0;
    for (int j = 1; j <= 4; ++j) {
        const double term = std::exp(-2.0 * j * j * v);
        sum += (j % 2 == 1 ? 1.0 : -1.0) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KSResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    KSResult r;
    r.n1 = static_cast<std::int64_t>(a.size());
    r.n2 = static_cast<std::int64_t>(b.size());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a.front() == a.back() && b.front() == b.back() && a.front() == b.front()) {
        r.degenerate = true;
        r.statistic = 0.0;
        r.p_value = 1.0;
        return r;
    }
    const double sa = 1.0 / static_cast<double>(a.size());
    const double sb = 1.0 / static_cast<double>(b.size());
    std::size_t ia = 0, ib = 0;
    double cdf_diff = 0.0, d_max = 0.0;
    while (ia < a.size() && ib < b.size()) {
        const double x = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] == x) {
            cdf_diff += sa;
            ++ia;
        }
        while (ib < b.size() && b[ib] == x) {
            cdf_diff -= sb;
            ++ib;
        }
        d_max = std::max(d_max, std::abs(cdf_diff));
    }
    r.statistic = d_max;
    const double ne = static_cast<double>(r.n1) * static_cast<double>(r.n2) /
                      static_cast<double>(r.n1 + r.n2);
    const double sq = std::sqrt(ne);
    r.p_value = kolmogorov_q((sq + 0.12 + 0.11 / sq) * d_max);
    return r;
}

}  // namespace ewc
