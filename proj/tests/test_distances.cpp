#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "specdist/distances.hpp"

using namespace specdist;

namespace {

NormalizedSpectrum ns(std::vector<double> p) { return NormalizedSpectrum::from_probabilities(std::move(p)); }

SpectrumEnsemble random_ensemble(std::mt19937_64& gen, std::size_t m, std::size_t bins, bool sparse = false) {
    std::vector<NormalizedSpectrum> members;
    for (std::size_t j = 0; j < m; ++j)
        members.push_back(ns(oracle::random_simplex(gen, bins, sparse)));
    return SpectrumEnsemble(std::move(members));
}

} // namespace

TEST(WeightVector, Validation) {
    EXPECT_NO_THROW(WeightVector({0.25, 0.75}));
    EXPECT_THROW(WeightVector({0.0, 1.0}), DimensionError);
    EXPECT_THROW(WeightVector({0.5, 0.6}), DimensionError);
    EXPECT_THROW(WeightVector(std::vector<double>{}), DimensionError);
    const auto u = WeightVector::uniform(4);
    EXPECT_EQ(u.size(), 4u);
    EXPECT_DOUBLE_EQ(u[2], 0.25);
}

TEST(SpectrumEnsemble, Validation) {
    EXPECT_THROW(SpectrumEnsemble({ns({1.0})}), DimensionError);
    EXPECT_THROW(SpectrumEnsemble({ns({1.0}), ns({0.5, 0.5})}), DimensionError);
    EXPECT_THROW(SpectrumEnsemble({ns({1.0}), NormalizedSpectrum::from_probabilities({1.0}, 2.0)}), DimensionError);
    EXPECT_THROW(SpectrumEnsemble({ns({1.0}), ns({1.0})}, {"only-one"}), DimensionError);
}

TEST(KlDistance, SelfDistanceIsZero) {
    std::mt19937_64 gen(1);
    for (int i = 0; i < 20; ++i) {
        const auto p = ns(oracle::random_simplex(gen, 17, i % 2 == 0));
        EXPECT_NEAR(kl_spectral_distance(p, p, 1e-12), 0.0, 1e-12);
    }
}

TEST(KlDistance, DisjointSupportWithoutFloorIsInfinite) {
    const double d = kl_spectral_distance(ns({1, 0, 0}), ns({0, 1, 0}), 0.0);
    EXPECT_TRUE(std::isinf(d));
    EXPECT_GT(d, 0.0);
    EXPECT_TRUE(std::isfinite(kl_spectral_distance(ns({1, 0, 0}), ns({0, 1, 0}))));
}

TEST(KlDistance, TwoBinAnalytic) {
    const double expected = 0.75 * std::log(1.5) + 0.25 * std::log(0.5);
    EXPECT_NEAR(kl_spectral_distance(ns({0.75, 0.25}), ns({0.5, 0.5}), 0.0), expected, 1e-15);
    EXPECT_NEAR(expected, 0.13081, 1e-5);
}

TEST(KlDistance, FlooredMatchesScalarOracleAndIsNonNegative) {
    std::mt19937_64 gen(2);
    for (int i = 0; i < 200; ++i) {
        const auto p = oracle::random_simplex(gen, 9, true), q = oracle::random_simplex(gen, 9, true);
        const double d = kl_spectral_distance(ns(p), ns(q), 1e-12);
        EXPECT_GE(d, 0.0);
        EXPECT_NEAR(d, oracle::kl(oracle::floor_renorm(p, 1e-12), oracle::floor_renorm(q, 1e-12)), 1e-9 * (1 + d));
    }
}

TEST(KlDistance, RejectsMismatchedGridsAndNegativeFloor) {
    EXPECT_THROW(kl_spectral_distance(ns({1.0}), ns({0.5, 0.5})), DimensionError);
    EXPECT_THROW(kl_spectral_distance(ns({1.0}), ns({1.0}), -1.0), DimensionError);
}

TEST(JsDivergence, IdenticalSpectraGiveZero) {
    std::mt19937_64 gen(3);
    const auto p = oracle::random_simplex(gen, 63);
    std::vector<NormalizedSpectrum> members(5, ns(p));
    EXPECT_NEAR(js_spectral_divergence(SpectrumEnsemble(members)), 0.0, 1e-12);
}

TEST(JsDivergence, DisjointDeltasGiveLogTwo) {
    const SpectrumEnsemble ens({ns({1, 0, 0}), ns({0, 0, 1})});
    EXPECT_NEAR(js_spectral_divergence(ens), std::log(2.0), 1e-15);
    EXPECT_NEAR(js_spectral_divergence(ens, WeightVector({0.5, 0.5})), std::log(2.0), 1e-15);
}

TEST(JsDivergence, TwoBinHandExample) {
    const SpectrumEnsemble ens({ns({1.0, 0.0}), ns({0.5, 0.5})});
    const double expected = oracle::entropy({0.75, 0.25}) - 0.5 * oracle::entropy({1.0, 0.0}) -
                            0.5 * oracle::entropy({0.5, 0.5});
    EXPECT_NEAR(js_spectral_divergence(ens), expected, 1e-15);
    EXPECT_NEAR(expected, 0.21576, 1e-5);
}

TEST(JsDivergence, WeightCountMustMatch) {
    const SpectrumEnsemble ens({ns({1.0, 0.0}), ns({0.5, 0.5})});
    EXPECT_THROW(js_spectral_divergence(ens, WeightVector::uniform(3)), DimensionError);
}

TEST(JsDivergence, BoundedByWeightEntropyAndMatchesOracle) {
    std::mt19937_64 gen(4);
    for (int i = 0; i < 300; ++i) {
        const std::size_t m = 2 + gen() % 6, bins = 1 + gen() % 40;
        const auto ens = random_ensemble(gen, m, bins, i % 3 == 0);
        std::vector<double> raw(m);
        double s = 0.0;
        for (auto& v : raw) {
            v = 0.1 + static_cast<double>(gen() % 1000) / 1000.0;
            s += v;
        }
        for (auto& v : raw)
            v /= s;
        const WeightVector w(raw);
        const double js = js_spectral_divergence(ens, w);
        EXPECT_GE(js, 0.0);
        EXPECT_LE(js, oracle::entropy(raw) + 1e-12);

        std::vector<double> mix(bins, 0.0);
        double members = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t b = 0; b < bins; ++b)
                mix[b] += raw[j] * ens[j].prob(b);
            members += raw[j] * oracle::entropy(ens[j].probs());
        }
        EXPECT_NEAR(js, std::max(0.0, oracle::entropy(mix) - members), 1e-12);
    }
}

TEST(KlMatrix, IdenticalSpectraGiveZeroMatrix) {
    std::mt19937_64 gen(5);
    const auto p = oracle::random_simplex(gen, 15);
    const auto kl = kl_matrix(SpectrumEnsemble({ns(p), ns(p), ns(p)}));
    for (double v : kl.data())
        EXPECT_NEAR(v, 0.0, 1e-15);
    EXPECT_NEAR(mean_kl(kl), 0.0, 1e-15);
}

TEST(KlMatrix, MatchesPerEntryOracleAndIsAsymmetric) {
    std::mt19937_64 gen(6);
    const auto ens = random_ensemble(gen, 3, 15);
    const auto kl = kl_matrix(ens, 1e-12);
    ASSERT_EQ(kl.size(), 3u);
    bool asymmetric = false;
    for (std::size_t l = 0; l < 3; ++l) {
        EXPECT_EQ(kl(l, l), 0.0);
        for (std::size_t m = 0; m < 3; ++m) {
            EXPECT_GE(kl(l, m), 0.0);
            const double ref = oracle::kl(oracle::floor_renorm(ens[l].probs(), 1e-12),
                                          oracle::floor_renorm(ens[m].probs(), 1e-12));
            EXPECT_NEAR(kl(l, m), ref, 1e-12);
            asymmetric = asymmetric || std::abs(kl(l, m) - kl(m, l)) > 1e-9;
        }
    }
    EXPECT_TRUE(asymmetric);
}

TEST(MeanKl, DirectArithmetic) {
    EXPECT_EQ(mean_kl(SquareMatrix(3)), 0.0);
    EXPECT_DOUBLE_EQ(mean_kl(SquareMatrix(2, 2, {0, 1, 1, 0})), 0.5);
    EXPECT_THROW(SquareMatrix(2, 3, {0, 0, 0, 0, 0, 0}), DimensionError);
    EXPECT_THROW(mean_kl(SquareMatrix(0)), DimensionError);

    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    std::vector<double> data(400);
    for (auto& v : data)
        v = u(gen);
    double naive = 0.0;
    for (std::size_t r = 0; r < 20; ++r)
        for (std::size_t c = 0; c < 20; ++c)
            naive += data[r * 20 + c];
    EXPECT_NEAR(mean_kl(SquareMatrix(20, 20, data)), naive / 400.0, 1e-13);
}

TEST(Inequality, MeanKlDominatesJsOnRandomEnsembles) {
    std::mt19937_64 gen(8);
    for (int i = 0; i < 500; ++i) {
        const std::size_t m = std::vector<std::size_t>{2, 5, 20}[i % 3];
        const std::size_t bins = (i % 2 == 0) ? 15 : 127;
        const auto ens = random_ensemble(gen, m, bins, i % 4 == 0);
        const double js = js_spectral_divergence(ens);
        const double mk = mean_kl(kl_matrix(ens));
        EXPECT_GE(mk, js - 1e-9) << "trial " << i;
    }
}

TEST(CrossCorrelation, Basics) {
    const MetricSeries a({1.0, 2.0, 4.0, 3.0});
    EXPECT_NEAR(cross_correlation(a, a), 1.0, 1e-12);
    MetricSeries neg({-1.0, -2.0, -4.0, -3.0});
    EXPECT_NEAR(cross_correlation(a, neg), -1.0, 1e-12);
    const MetricSeries x({1.0, 2.0, 3.0}), y({2.0, 4.0, 7.0});
    EXPECT_NEAR(cross_correlation(x, y), oracle::two_pass_correlation({1, 2, 3}, {2, 4, 7}), 1e-12);
}

TEST(CrossCorrelation, RandomSeriesMatchTwoPassOracle) {
    std::mt19937_64 gen(9);
    std::normal_distribution<double> d(100.0, 3.0);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> a(200), b(200);
        for (std::size_t k = 0; k < 200; ++k) {
            a[k] = d(gen);
            b[k] = 0.3 * a[k] + d(gen);
        }
        EXPECT_NEAR(cross_correlation(MetricSeries(a), MetricSeries(b)), oracle::two_pass_correlation(a, b), 1e-9);
    }
}

TEST(CrossCorrelation, Errors) {
    EXPECT_THROW(cross_correlation(MetricSeries({1.0, 1.0, 1.0}), MetricSeries({1.0, 2.0, 3.0})),
                 UndefinedCorrelationError);
    EXPECT_THROW(cross_correlation(MetricSeries({1.0, 2.0}), MetricSeries({1.0, 2.0, 3.0})), DimensionError);
    EXPECT_THROW(MetricSeries({1.0, std::numeric_limits<double>::quiet_NaN()}), DimensionError);
}

TEST(Proportionality, ExactAndHandExamples) {
    std::vector<double> x{0.1, 0.5, 0.7, 1.3}, y;
    for (double v : x)
        y.push_back(0.42 * v);
    EXPECT_NEAR(fit_proportionality(MetricSeries(x), MetricSeries(y)), 0.42, 1e-12);
    EXPECT_NEAR(fit_proportionality(MetricSeries({1.0, 2.0}), MetricSeries({1.0, 1.0})), 0.6, 1e-15);
    EXPECT_THROW(fit_proportionality(MetricSeries({0.0, 0.0}), MetricSeries({1.0, 1.0})), DegenerateFitError);
}

TEST(Proportionality, ScaleConsistent) {
    std::mt19937_64 gen(10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(50), y(50);
    for (std::size_t k = 0; k < 50; ++k) {
        x[k] = u(gen);
        y[k] = 0.4 * x[k] + 0.1 * u(gen);
    }
    const double base = fit_proportionality(MetricSeries(x), MetricSeries(y));
    for (double c : {-2.0, 1e-3, 7.0}) {
        auto cx = x, cy = y;
        for (std::size_t k = 0; k < 50; ++k) {
            cx[k] *= c;
            cy[k] *= c;
        }
        EXPECT_NEAR(fit_proportionality(MetricSeries(cx), MetricSeries(cy)), base, 1e-12);
    }
}

TEST(LineFit, RecoversSlopeAndIntercept) {
    const auto f = fit_line(MetricSeries({0.0, 1.0, 2.0, 3.0}), MetricSeries({1.0, 3.0, 5.0, 7.0}));
    EXPECT_NEAR(f.slope, 2.0, 1e-12);
    EXPECT_NEAR(f.intercept, 1.0, 1e-12);
    EXPECT_THROW(fit_line(MetricSeries({2.0, 2.0}), MetricSeries({1.0, 3.0})), DegenerateFitError);
}

TEST(DistanceReport, BundlesEverything) {
    const SpectrumEnsemble ens({ns({0.7, 0.2, 0.1}), ns({0.1, 0.2, 0.7})}, {"x", "y"});
    const auto r = distance_report(ens, WeightVector::uniform(2), 1e-12, 42);
    EXPECT_EQ(r.window_start, 42u);
    EXPECT_DOUBLE_EQ(r.js, js_spectral_divergence(ens));
    EXPECT_DOUBLE_EQ(r.mean_kl, mean_kl(kl_matrix(ens)));
    ASSERT_EQ(r.entropies.size(), 2u);
    EXPECT_NEAR(r.entropies[0], oracle::entropy({0.7, 0.2, 0.1}), 1e-15);
    EXPECT_DOUBLE_EQ(r.modes[0], 1.0 / 4.0);
    EXPECT_DOUBLE_EQ(r.modes[1], 3.0 / 4.0);
    EXPECT_GE(r.mean_kl, r.js);
}
