#include "belief/stats/rank_tests.hpp"

#include <cstdint>

#include "belief/errors.hpp"
#include "belief/stats/normal.hpp"

namespace belief::stats {

namespace {

constexpr int kSignedRankExactMax = 20;
constexpr Eigen::Index kRankSumExactMax = 12;
constexpr int kOracleMaxN = 20;
constexpr double kOracleMaxLabelings = 1e6;
constexpr double kSumTolerance = 1e-9;

struct Tails {
    double ge = 1.0;  // P(T >= t)
    double le = 1.0;  // P(T <= t)
};

double combine(const Tails& tails, Sidedness sidedness) {
    switch (sidedness) {
        case Sidedness::OneSidedGreater: return std::clamp(tails.ge, 0.0, 1.0);
        case Sidedness::OneSidedLess: return std::clamp(tails.le, 0.0, 1.0);
        case Sidedness::TwoSided: break;
    }
    return std::clamp(2.0 * std::min(tails.ge, tails.le), 0.0, 1.0);
}

// Normal approximation with continuity correction plus the Edgeworth term for
// excess kurtosis; both nulls are symmetric so the skewness term vanishes.
Tails edgeworth_tails(double t, double mean, double var, double fourth_cumulant) {
    if (!(var > 0.0)) return {1.0, 1.0};
    const double sd = std::sqrt(var);
    const double excess_kurtosis = fourth_cumulant / (var * var);
    auto correction = [&](double z) { return normal_pdf(z) * excess_kurtosis / 24.0 * (z * z * z - 3.0 * z); };
    const double z_hi = (t - 0.5 - mean) / sd;
    const double z_lo = (t + 0.5 - mean) / sd;
    Tails tails;
    tails.ge = std::clamp(normal_sf(z_hi) + correction(z_hi), 0.0, 1.0);
    tails.le = std::clamp(normal_cdf(z_lo) - correction(z_lo), 0.0, 1.0);
    return tails;
}

std::vector<int> doubled(const Eigen::VectorXd& ranks) {
    std::vector<int> out(static_cast<std::size_t>(ranks.size()));
    for (Eigen::Index i = 0; i < ranks.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<int>(std::lround(2.0 * ranks(i)));
    return out;
}

Tails tails_from_counts(const std::vector<double>& counts, long observed) {
    double total = 0.0, ge = 0.0, le = 0.0;
    for (std::size_t s = 0; s < counts.size(); ++s) {
        total += counts[s];
        if (static_cast<long>(s) >= observed) ge += counts[s];
        if (static_cast<long>(s) <= observed) le += counts[s];
    }
    return {ge / total, le / total};
}

struct SignedRanks {
    Eigen::VectorXd ranks;  // ranks of |d| over non-zero differences
    std::vector<bool> positive;
    double t_plus = 0.0;
};

SignedRanks signed_ranks(const Eigen::Ref<const Eigen::VectorXd>& first, const Eigen::Ref<const Eigen::VectorXd>& second) {
    if (first.size() != second.size()) throw std::invalid_argument("paired samples differ in length");
    std::vector<double> magnitudes;
    SignedRanks sr;
    for (Eigen::Index i = 0; i < first.size(); ++i) {
        const double d = first(i) - second(i);
        const double scale = std::max(std::abs(first(i)), std::abs(second(i)));
        if (std::abs(d) <= 1e-12 * scale) continue;
        magnitudes.push_back(std::abs(d));
        sr.positive.push_back(d > 0.0);
    }
    if (magnitudes.empty()) throw DegenerateInputError("all paired differences are zero");
    sr.ranks = midranks(Eigen::Map<const Eigen::VectorXd>(magnitudes.data(), static_cast<Eigen::Index>(magnitudes.size())));
    for (Eigen::Index i = 0; i < sr.ranks.size(); ++i) {
        if (sr.positive[static_cast<std::size_t>(i)]) sr.t_plus += sr.ranks(i);
    }
    return sr;
}

// Subset-sum counts over doubled ranks: counts[s] = #{sign patterns with 2*T+ = s}.
std::vector<double> signed_rank_null(const Eigen::VectorXd& ranks) {
    const auto r2 = doubled(ranks);
    int total = 0;
    for (int r : r2) total += r;
    std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
    counts[0] = 1.0;
    for (int r : r2) {
        for (int s = total; s >= r; --s) counts[static_cast<std::size_t>(s)] += counts[static_cast<std::size_t>(s - r)];
    }
    return counts;
}

// counts[s] = #{size-m subsets of the pooled ranks with doubled rank sum s}.
std::vector<double> rank_sum_null(const Eigen::VectorXd& ranks, Eigen::Index m) {
    const auto r2 = doubled(ranks);
    int total = 0;
    for (int r : r2) total += r;
    const auto width = static_cast<std::size_t>(total) + 1;
    std::vector<std::vector<double>> dp(static_cast<std::size_t>(m) + 1, std::vector<double>(width, 0.0));
    dp[0][0] = 1.0;
    for (int r : r2) {
        for (Eigen::Index k = m; k >= 1; --k) {
            auto& row = dp[static_cast<std::size_t>(k)];
            const auto& prev = dp[static_cast<std::size_t>(k - 1)];
            for (int s = total; s >= r; --s) row[static_cast<std::size_t>(s)] += prev[static_cast<std::size_t>(s - r)];
        }
    }
    return dp[static_cast<std::size_t>(m)];
}

// Fourth cumulant of the sum of a size-m sample drawn without replacement
// from the N pooled ranks.
double rank_sum_fourth_cumulant(const Eigen::VectorXd& ranks, double m) {
    const double N = static_cast<double>(ranks.size());
    if (N <= 3.0) return 0.0;
    const Eigen::ArrayXd centered = ranks.array() - ranks.mean();
    const double mu2 = centered.square().mean();
    const double mu4 = centered.square().square().mean();
    const double mk = m * (N - m);
    const double lead = mk / ((N - 1.0) * (N - 2.0) * (N - 3.0));
    return lead * ((N * (N + 1.0) - 6.0 * mk) * mu4 - (3.0 * N * (N - 1.0) - 6.0 * (2.0 * N - 3.0) * mk / (N - 1.0)) * mu2 * mu2);
}

Eigen::VectorXd pooled(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
    Eigen::VectorXd all(a.size() + b.size());
    all << a, b;
    return all;
}

void require_groups(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
    if (a.size() == 0 || b.size() == 0) throw DomainError("rank-sum test needs two non-empty groups");
}

}  // namespace

std::string_view to_string(Sidedness s) {
    switch (s) {
        case Sidedness::TwoSided: return "two-sided";
        case Sidedness::OneSidedGreater: return "greater";
        case Sidedness::OneSidedLess: return "less";
    }
    return "?";
}

TestResult wilcoxon_signed_rank(const Eigen::Ref<const Eigen::VectorXd>& first,
                                const Eigen::Ref<const Eigen::VectorXd>& second, Sidedness sidedness,
                                PValueMethod method) {
    const SignedRanks sr = signed_ranks(first, second);
    const auto n = static_cast<std::size_t>(sr.ranks.size());

    TestResult result;
    result.method = "wilcoxon_signed_rank";
    result.statistic = sr.t_plus;
    result.sidedness = sidedness;
    result.n = {n};

    const bool exact = method == PValueMethod::Exact ||
                       (method == PValueMethod::Auto && sr.ranks.size() <= kSignedRankExactMax);
    if (exact) {
        const auto counts = signed_rank_null(sr.ranks);
        result.p_value = combine(tails_from_counts(counts, std::lround(2.0 * sr.t_plus)), sidedness);
        result.exact = true;
        return result;
    }
    const double mean = sr.ranks.sum() / 2.0;
    const double var = sr.ranks.squaredNorm() / 4.0;
    const double k4 = -sr.ranks.array().pow(4).sum() / 8.0;
    result.p_value = combine(edgeworth_tails(sr.t_plus, mean, var, k4), sidedness);
    return result;
}

TestResult wilcoxon_exact_oracle(const Eigen::Ref<const Eigen::VectorXd>& first,
                                 const Eigen::Ref<const Eigen::VectorXd>& second, Sidedness sidedness) {
    const SignedRanks sr = signed_ranks(first, second);
    const auto n = static_cast<int>(sr.ranks.size());
    if (n > kOracleMaxN) throw SizeError("signed-rank oracle limited to n <= 20");

    std::uint64_t ge = 0, le = 0;
    const std::uint64_t patterns = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
        double t = 0.0;
        for (int i = 0; i < n; ++i) {
            if (mask & (std::uint64_t{1} << i)) t += sr.ranks(i);
        }
        if (t >= sr.t_plus - kSumTolerance) ++ge;
        if (t <= sr.t_plus + kSumTolerance) ++le;
    }
    TestResult result;
    result.method = "wilcoxon_exact_oracle";
    result.statistic = sr.t_plus;
    result.sidedness = sidedness;
    result.n = {static_cast<std::size_t>(n)};
    result.exact = true;
    result.p_value = combine({static_cast<double>(ge) / static_cast<double>(patterns),
                              static_cast<double>(le) / static_cast<double>(patterns)},
                             sidedness);
    return result;
}

RankSumStatistics mann_whitney_statistics(const Eigen::Ref<const Eigen::VectorXd>& group_a,
                                          const Eigen::Ref<const Eigen::VectorXd>& group_b) {
    require_groups(group_a, group_b);
    const Eigen::VectorXd ranks = midranks(pooled(group_a, group_b));
    const double na = static_cast<double>(group_a.size());
    const double nb = static_cast<double>(group_b.size());
    const double rank_sum_a = ranks.head(group_a.size()).sum();
    const double rank_sum_b = ranks.tail(group_b.size()).sum();
    return {rank_sum_a - na * (na + 1.0) / 2.0, rank_sum_b - nb * (nb + 1.0) / 2.0};
}

TestResult mann_whitney_u(const Eigen::Ref<const Eigen::VectorXd>& group_a,
                          const Eigen::Ref<const Eigen::VectorXd>& group_b, Sidedness sidedness, PValueMethod method) {
    require_groups(group_a, group_b);
    const Eigen::VectorXd ranks = midranks(pooled(group_a, group_b));
    const Eigen::Index m = group_a.size();
    const double na = static_cast<double>(m);
    const double nb = static_cast<double>(group_b.size());
    const double rank_sum_a = ranks.head(m).sum();
    const double u_a = rank_sum_a - na * (na + 1.0) / 2.0;

    TestResult result;
    result.method = "mann_whitney_u";
    result.statistic = u_a;
    result.sidedness = sidedness;
    result.n = {static_cast<std::size_t>(group_a.size()), static_cast<std::size_t>(group_b.size())};

    const bool exact = method == PValueMethod::Exact ||
                       (method == PValueMethod::Auto && ranks.size() <= kRankSumExactMax);
    if (exact) {
        const auto counts = rank_sum_null(ranks, m);
        result.p_value = combine(tails_from_counts(counts, std::lround(2.0 * rank_sum_a)), sidedness);
        result.exact = true;
        return result;
    }
    const double N = na + nb;
    const double mu2 = (ranks.array() - ranks.mean()).square().mean();
    const double var = na * nb / (N - 1.0) * mu2;
    const double k4 = rank_sum_fourth_cumulant(ranks, na);
    result.p_value = combine(edgeworth_tails(u_a, na * nb / 2.0, var, k4), sidedness);
    return result;
}

TestResult mann_whitney_exact_oracle(const Eigen::Ref<const Eigen::VectorXd>& group_a,
                                     const Eigen::Ref<const Eigen::VectorXd>& group_b, Sidedness sidedness) {
    require_groups(group_a, group_b);
    const Eigen::Index N = group_a.size() + group_b.size();
    const Eigen::Index m = group_a.size();
    double labelings = 1.0;
    for (Eigen::Index k = 1; k <= m; ++k) labelings = labelings * static_cast<double>(N - m + k) / static_cast<double>(k);
    if (labelings > kOracleMaxLabelings) throw SizeError("rank-sum oracle limited to 1e6 labelings");

    const Eigen::VectorXd ranks = midranks(pooled(group_a, group_b));
    const double na = static_cast<double>(m);
    const double u_obs = ranks.head(m).sum() - na * (na + 1.0) / 2.0;

    // Walk every size-m subset in lexicographic order.
    std::vector<bool> in_a(static_cast<std::size_t>(N), false);
    std::fill(in_a.begin(), in_a.begin() + m, true);
    std::uint64_t total = 0, ge = 0, le = 0;
    do {
        double rank_sum = 0.0;
        for (Eigen::Index i = 0; i < N; ++i) {
            if (in_a[static_cast<std::size_t>(i)]) rank_sum += ranks(i);
        }
        const double u = rank_sum - na * (na + 1.0) / 2.0;
        ++total;
        if (u >= u_obs - kSumTolerance) ++ge;
        if (u <= u_obs + kSumTolerance) ++le;
    } while (std::prev_permutation(in_a.begin(), in_a.end()));

    TestResult result;
    result.method = "mann_whitney_exact_oracle";
    result.statistic = u_obs;
    result.sidedness = sidedness;
    result.n = {static_cast<std::size_t>(group_a.size()), static_cast<std::size_t>(group_b.size())};
    result.exact = true;
    result.p_value = combine({static_cast<double>(ge) / static_cast<double>(total),
                              static_cast<double>(le) / static_cast<double>(total)},
                             sidedness);
    return result;
}

}  // namespace belief::stats
