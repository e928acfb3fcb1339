#include <doctest.h>

#include <map>

#include "belief/errors.hpp"
#include "belief/stats/rank_tests.hpp"
#include "support/generators.hpp"

using namespace belief;
using namespace belief::stats;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
    VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

// Independent mid-ranks: values rounded to 1e-9 define tie groups.
std::vector<double> brute_ranks(const std::vector<double>& v) {
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double below = 0, equal = 0;
        for (double w : v) {
            if (std::abs(w - v[i]) < 1e-9) ++equal;
            else if (w < v[i]) ++below;
        }
        ranks[i] = below + (equal + 1) / 2.0;
    }
    return ranks;
}

double two_sided(double ge, double le) { return std::min(1.0, 2.0 * std::min(ge, le)); }

// Sign-flip enumeration over the ranks of the non-zero |d|.
double signed_rank_brute(const std::vector<double>& d, Sidedness side) {
    std::vector<double> mags;
    std::vector<bool> pos;
    for (double x : d) {
        if (x == 0.0) continue;
        mags.push_back(std::abs(x));
        pos.push_back(x > 0);
    }
    const auto r = brute_ranks(mags);
    double t = 0;
    for (std::size_t i = 0; i < r.size(); ++i) t += pos[i] ? r[i] : 0.0;
    const std::size_t n = r.size();
    double ge = 0, le = 0, total = 0;
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += (mask >> i & 1) ? r[i] : 0.0;
        total += 1;
        ge += s >= t - 1e-9;
        le += s <= t + 1e-9;
    }
    ge /= total;
    le /= total;
    return side == Sidedness::OneSidedGreater ? ge : side == Sidedness::OneSidedLess ? le : two_sided(ge, le);
}

// Labeling enumeration of pooled ranks; the statistic is the rank sum of A.
double rank_sum_brute(const std::vector<double>& a, const std::vector<double>& b, Sidedness side) {
    std::vector<double> all(a);
    all.insert(all.end(), b.begin(), b.end());
    const auto r = brute_ranks(all);
    double t = 0;
    for (std::size_t i = 0; i < a.size(); ++i) t += r[i];
    const std::size_t n = all.size();
    double ge = 0, le = 0, total = 0;
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcountll(mask)) != a.size()) continue;
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += (mask >> i & 1) ? r[i] : 0.0;
        total += 1;
        ge += s >= t - 1e-9;
        le += s <= t + 1e-9;
    }
    ge /= total;
    le /= total;
    return side == Sidedness::OneSidedGreater ? ge : side == Sidedness::OneSidedLess ? le : two_sided(ge, le);
}

std::vector<double> as_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

constexpr Sidedness kSides[] = {Sidedness::TwoSided, Sidedness::OneSidedGreater, Sidedness::OneSidedLess};

}  // namespace

TEST_CASE("midranks average tied positions") {
    const VectorXd r = midranks(vec({0.3, 0.1, 0.3, 0.2}));
    CHECK(r(0) == 3.5);
    CHECK(r(1) == 1.0);
    CHECK(r(2) == 3.5);
    CHECK(r(3) == 2.0);
    CHECK(has_ties(r));
    CHECK_FALSE(has_ties(midranks(vec({1, 2, 3}))));
}

TEST_CASE("wilcoxon signed-rank examples") {
    const VectorXd zero = VectorXd::Zero(5);
    CHECK_THROWS_AS(wilcoxon_signed_rank(vec({0.3, 0.4}), vec({0.3, 0.4}), Sidedness::TwoSided), DegenerateInputError);

    const VectorXd d = vec({0.1, 0.2, -0.1, 0.3, 0.4});
    const double brute = signed_rank_brute(as_std(d), Sidedness::TwoSided);
    CHECK(brute == doctest::Approx(0.1875).epsilon(1e-12));  // 6 of 32 sign patterns
    const auto r = wilcoxon_signed_rank(d, zero, Sidedness::TwoSided);
    CHECK(r.p_value == doctest::Approx(brute).epsilon(1e-12));
    CHECK(r.statistic == 13.5);
    CHECK(r.exact);
    CHECK(wilcoxon_exact_oracle(d, zero, Sidedness::TwoSided).p_value == doctest::Approx(0.1875).epsilon(1e-12));
}

TEST_CASE("wilcoxon exact oracle examples") {
    CHECK(wilcoxon_exact_oracle(vec({0.5}), vec({0.0}), Sidedness::OneSidedGreater).p_value == 0.5);
    CHECK(wilcoxon_exact_oracle(vec({0.1, 0.2}), vec({0.0, 0.0}), Sidedness::OneSidedGreater).p_value == 0.25);
    CHECK_THROWS_AS(wilcoxon_exact_oracle(VectorXd::LinSpaced(21, 1, 21), VectorXd::Zero(21), Sidedness::TwoSided),
                    SizeError);
}

TEST_CASE("mann-whitney examples") {
    const auto same = mann_whitney_u(vec({1, 2}), vec({1, 2}), Sidedness::TwoSided);
    CHECK(same.statistic == 2.0);
    CHECK(same.p_value == 1.0);
    CHECK(mann_whitney_u(vec({3, 4}), vec({1, 2}), Sidedness::OneSidedGreater).p_value ==
          doctest::Approx(1.0 / 6).epsilon(1e-12));
    CHECK_THROWS_AS(mann_whitney_u(VectorXd(0), vec({1}), Sidedness::TwoSided), DomainError);
}

TEST_CASE("mann-whitney exact oracle examples") {
    CHECK(mann_whitney_exact_oracle(vec({1}), vec({2}), Sidedness::OneSidedGreater).p_value == 1.0);
    CHECK(mann_whitney_exact_oracle(vec({1}), vec({2}), Sidedness::OneSidedLess).p_value == 0.5);
    CHECK(mann_whitney_exact_oracle(vec({1}), vec({1}), Sidedness::OneSidedGreater).p_value == 1.0);
    CHECK(mann_whitney_exact_oracle(vec({1}), vec({1}), Sidedness::OneSidedLess).p_value == 1.0);
    CHECK_THROWS_AS(mann_whitney_exact_oracle(VectorXd::LinSpaced(13, 1, 13), VectorXd::LinSpaced(13, 14, 26),
                                              Sidedness::TwoSided),
                    SizeError);
}

TEST_CASE("library oracles agree with brute-force enumeration, ties included") {
    belief::Rng rng(17);
    for (int trial = 0; trial < 400; ++trial) {
        const auto n = 1 + rng.below(10);
        VectorXd first(n), second(n);
        for (Eigen::Index i = 0; i < first.size(); ++i) {
            first(i) = testgen::scale_value(rng, 0, 0.1);
            second(i) = testgen::scale_value(rng, 0, 0.1);
        }
        std::vector<double> d(n);
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = std::round((first(i) - second(i)) * 100) / 100;
            any |= d[i] != 0.0;
        }
        if (!any) continue;
        for (Sidedness side : kSides) {
            const double expect = signed_rank_brute(d, side);
            REQUIRE(wilcoxon_exact_oracle(first, second, side).p_value == doctest::Approx(expect).epsilon(1e-9));
            REQUIRE(wilcoxon_signed_rank(first, second, side, PValueMethod::Exact).p_value ==
                    doctest::Approx(expect).epsilon(1e-9));
        }

        const auto na = 1 + rng.below(6), nb = 1 + rng.below(6);
        VectorXd a(na), b(nb);
        for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = testgen::scale_value(rng, 0, 0.05);
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = testgen::scale_value(rng, 0, 0.05);
        for (Sidedness side : kSides) {
            const double expect = rank_sum_brute(as_std(a), as_std(b), side);
            REQUIRE(mann_whitney_exact_oracle(a, b, side).p_value == doctest::Approx(expect).epsilon(1e-9));
            REQUIRE(mann_whitney_u(a, b, side, PValueMethod::Exact).p_value == doctest::Approx(expect).epsilon(1e-9));
        }
    }
}

TEST_CASE("exact branch matches the oracles on tie-free inputs up to size 12") {
    belief::Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = 1 + rng.below(12);
        const VectorXd first = testgen::distinct_values(rng, n);
        const VectorXd second = VectorXd::Zero(static_cast<Eigen::Index>(n));
        const VectorXd signs = testgen::normal_vector(rng, static_cast<Eigen::Index>(n));
        const VectorXd d = first.array() * signs.array().sign();
        for (Sidedness side : kSides) {
            const auto r = wilcoxon_signed_rank(d, second, side);
            REQUIRE(r.exact);
            REQUIRE(std::abs(r.p_value - wilcoxon_exact_oracle(d, second, side).p_value) < 1e-9);
        }
        const auto total = 2 + rng.below(11);
        const auto na = 1 + rng.below(total - 1);
        const VectorXd pool = testgen::distinct_values(rng, total);
        const VectorXd a = pool.head(static_cast<Eigen::Index>(na)), b = pool.tail(static_cast<Eigen::Index>(total - na));
        for (Sidedness side : kSides) {
            const auto r = mann_whitney_u(a, b, side);
            REQUIRE(r.exact);
            REQUIRE(std::abs(r.p_value - mann_whitney_exact_oracle(a, b, side).p_value) < 1e-9);
        }
    }
}

TEST_CASE("U_A + U_B = n_a n_b (property)") {
    belief::Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const auto na = 1 + rng.below(40), nb = 1 + rng.below(40);
        VectorXd a(na), b(nb);
        for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = testgen::scale_value(rng);
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = testgen::scale_value(rng);
        const auto u = mann_whitney_statistics(a, b);
        REQUIRE(u.u_a + u.u_b == doctest::Approx(static_cast<double>(na * nb)));
        REQUIRE(mann_whitney_u(a, b, Sidedness::OneSidedGreater).statistic == u.u_a);
    }
}

TEST_CASE("rank tests are invariant under monotone transforms (property)") {
    belief::Rng rng(31);
    auto transforms = std::vector<double (*)(double)>{
        [](double x) { return std::exp(x / 100); },
        [](double x) { return x * x * x + 2 * x; },
        [](double x) { return std::log1p(x) * 7 - 3; },
    };
    for (int trial = 0; trial < 200; ++trial) {
        const auto total = 2 + rng.below(20);
        const auto na = 1 + rng.below(total - 1);
        VectorXd pool = testgen::distinct_values(rng, total);
        const VectorXd a = pool.head(static_cast<Eigen::Index>(na)), b = pool.tail(static_cast<Eigen::Index>(total - na));
        const auto base = mann_whitney_u(a, b, Sidedness::TwoSided);
        for (auto f : transforms) {
            const auto r = mann_whitney_u(a.unaryExpr(f), b.unaryExpr(f), Sidedness::TwoSided);
            REQUIRE(r.statistic == base.statistic);
            REQUIRE(r.p_value == doctest::Approx(base.p_value).epsilon(1e-12));
        }

        // Signed-rank: odd increasing transforms of the differences keep |d| order and signs.
        const auto n = 1 + rng.below(25);
        VectorXd d = testgen::distinct_values(rng, n) / 10.0;
        for (Eigen::Index i = 0; i < d.size(); ++i) d(i) *= rng.coin() ? 1 : -1;
        const VectorXd zero = VectorXd::Zero(d.size());
        const auto w = wilcoxon_signed_rank(d, zero, Sidedness::TwoSided);
        const VectorXd odd = d.unaryExpr([](double x) { return x * x * x + std::sinh(x); });
        const auto w2 = wilcoxon_signed_rank(odd, zero, Sidedness::TwoSided);
        REQUIRE(w2.statistic == w.statistic);
        REQUIRE(w2.p_value == doctest::Approx(w.p_value).epsilon(1e-12));
    }
}

TEST_CASE("approximate branch stays near exact for tie-free sizes 11-12 (signed-rank)") {
    belief::Rng rng(123);
    double worst = 0.0;
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = 11 + rng.below(2);
        VectorXd d = testgen::distinct_values(rng, n);
        for (Eigen::Index i = 0; i < d.size(); ++i) d(i) *= rng.coin() ? 1 : -1;
        const VectorXd zero = VectorXd::Zero(d.size());
        for (Sidedness side : kSides) {
            const double approx = wilcoxon_signed_rank(d, zero, side, PValueMethod::Approximate).p_value;
            worst = std::max(worst, std::abs(approx - wilcoxon_exact_oracle(d, zero, side).p_value));
        }
    }
    CHECK(worst < 5e-3);
}

TEST_CASE("approximate branch for rank-sum with both groups of size >= 3") {
    belief::Rng rng(124);
    double worst = 0.0;
    for (int trial = 0; trial < 300; ++trial) {
        const auto total = 11 + rng.below(2);
        const auto na = 3 + rng.below(total - 5);
        const VectorXd pool = testgen::distinct_values(rng, total);
        const VectorXd a = pool.head(static_cast<Eigen::Index>(na)), b = pool.tail(static_cast<Eigen::Index>(total - na));
        for (Sidedness side : kSides) {
            const double approx = mann_whitney_u(a, b, side, PValueMethod::Approximate).p_value;
            worst = std::max(worst, std::abs(approx - mann_whitney_exact_oracle(a, b, side).p_value));
        }
    }
    CHECK(worst < 5e-3);
}

TEST_CASE("null p-values are uniform (Kolmogorov-Smirnov)") {
    std::vector<double> pw, pm;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        belief::Rng rng = substream(555, {seed});
        const VectorXd x = testgen::normal_vector(rng, 100), y = testgen::normal_vector(rng, 100);
        pw.push_back(wilcoxon_signed_rank(x, y, Sidedness::TwoSided).p_value);
        const VectorXd a = testgen::normal_vector(rng, 50), b = testgen::normal_vector(rng, 50);
        pm.push_back(mann_whitney_u(a, b, Sidedness::OneSidedGreater).p_value);
    }
    CHECK(testgen::ks_uniform(pw) < 0.05);
    CHECK(testgen::ks_uniform(pm) < 0.05);
}

TEST_CASE("large samples use the approximation and stay in [0,1]") {
    belief::Rng rng(8);
    const VectorXd a = testgen::normal_vector(rng, 300, 0.5), b = testgen::normal_vector(rng, 280, 0.0);
    const auto r = mann_whitney_u(a, b, Sidedness::OneSidedGreater);
    CHECK_FALSE(r.exact);
    CHECK(r.p_value < 1e-6);
    CHECK(mann_whitney_u(a, b, Sidedness::OneSidedLess).p_value > 0.999);
    CHECK(r.n == std::vector<std::size_t>{300, 280});
}
