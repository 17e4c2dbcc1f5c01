#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "plagdet/classifiers.hpp"
#include "support.hpp"

using namespace plagdet;
using namespace plagdet::classifiers;

namespace {

FeatureMatrix xor_data(size_t copies)
{
    FeatureMatrix fm;
    for (size_t k = 0; k < copies; ++k) {
        fm.add({0, 0}, 0);
        fm.add({1, 1}, 0);
        fm.add({0, 1}, 1);
        fm.add({1, 0}, 1);
    }
    return fm;
}

FeatureMatrix random_matrix(size_t n, size_t d, std::uint64_t seed)
{
    Rng rng(seed);
    FeatureMatrix fm;
    for (size_t i = 0; i < n; ++i) {
        Vector x(d);
        for (auto& v : x)
            v = rng.normal();
        fm.add(x, rng.bernoulli(0.5 + 0.3 * std::tanh(x[0])) ? 1 : 0);
    }
    return fm;
}

} // namespace

TEST(Spec, RejectsUnknownAndBadValues)
{
    EXPECT_THROW(ClassifierSpec(Algorithm::logreg, {{"alpha", 1.0}}), Error);
    EXPECT_THROW(ClassifierSpec(Algorithm::logreg, {{"penalty", std::string("l1")}}), Error);
    EXPECT_THROW(ClassifierSpec(Algorithm::svc, {{"kernel", std::string("sigmoid")}}), Error);
    EXPECT_THROW(ClassifierSpec(Algorithm::svc, {{"C", NAN}}), Error);
    EXPECT_THROW(parse_algorithm("xgboost"), Error);
    EXPECT_NO_THROW(ClassifierSpec(Algorithm::svc, {{"gamma", 0.5}}));
    EXPECT_EQ(ClassifierSpec(Algorithm::svc).string("kernel"), "poly");
}

TEST(Logreg, SeparableBlobs)
{
    const auto train = fixture::separable_blobs(200, 1.0, 1);
    const auto test = fixture::separable_blobs(200, 1.0, 2);
    const auto m = fit(ClassifierSpec(Algorithm::logreg), train);
    EXPECT_GE(fixture::accuracy_on(test, [&](const Vector& x) { return m.predict_proba(x); }), 0.95);
}

TEST(AllAlgorithms, LearnBlobs)
{
    const auto train = fixture::blobs(400, 1.5, 3, 3.0);
    const auto test = fixture::blobs(400, 1.5, 4, 3.0);
    for (Algorithm a : kAllAlgorithms) {
        const auto m = fit(ClassifierSpec(a, {}, 5), train);
        const double acc = fixture::accuracy_on(test, [&](const Vector& x) { return m.predict_proba(x); });
        EXPECT_GE(acc, 0.85) << algorithm_name(a);
        for (const auto& x : test.rows) {
            const double p = m.predict_proba(x);
            EXPECT_TRUE(p >= 0.0 && p <= 1.0) << algorithm_name(a);
        }
    }
}

TEST(Cart, FitsXorExactly)
{
    const auto data = xor_data(50);
    const auto m = fit(ClassifierSpec(Algorithm::cart), data);
    EXPECT_EQ(fixture::accuracy_on(data, [&](const Vector& x) { return m.predict_proba(x); }), 1.0);
}

TEST(Gnb, FarBlobsAreConfident)
{
    const auto data = fixture::blobs(400, 3.0, 6);
    const auto m = fit(ClassifierSpec(Algorithm::gnb), data);
    EXPECT_GT(m.predict_proba(Vector{3, 3}), 0.99);
    EXPECT_LT(m.predict_proba(Vector{-3, -3}), 0.01);
}

TEST(Gnb, SingleClassIsConstantWithWarning)
{
    FeatureMatrix fm;
    fm.add({1, 2}, 1);
    fm.add({3, 4}, 1);
    const auto m = fit(ClassifierSpec(Algorithm::gnb), fm);
    EXPECT_EQ(m.predict_proba(Vector{-100, 7}), 1.0);
    EXPECT_FALSE(m.warnings().empty());
}

TEST(Logreg, ZeroModelGivesHalf)
{
    const TrainedClassifier m(ClassifierSpec(Algorithm::logreg), LinearModel{Vector(3, 0.0), 0.0}, 3);
    EXPECT_EQ(m.predict_proba(Vector{5, -2, 9}), 0.5);
    EXPECT_NEAR(TrainedClassifier::constant(0.9, 3).predict_proba(Vector{1, 2, 3}), 0.9, 1e-15);
}

TEST(Rf, AveragesIdenticalTrees)
{
    Tree t;
    t.nodes = {{0, 0.5, 1, 2, 0}, {-1, 0, -1, -1, 0.2}, {-1, 0, -1, -1, 0.7}};
    ForestModel f{{t, t, t}};
    EXPECT_NEAR(f.predict_proba(Vector{0.0}), 0.2, 1e-15);
    EXPECT_NEAR(f.predict_proba(Vector{1.0}), 0.7, 1e-15);
}

TEST(LogregGradient, ClosedFormAtZero)
{
    const auto data = random_matrix(50, 3, 7);
    const Vector zero(4, 0.0);
    const auto g = logistic_gradient(zero, data, 0.5);
    Vector expect(4, 0.0);
    for (size_t i = 0; i < data.size(); ++i) {
        const double r = 0.5 - data.labels[i];
        for (size_t j = 0; j < 3; ++j)
            expect[j] += r * data.rows[i][j] / 50.0;
        expect[3] += r / 50.0;
    }
    for (size_t j = 0; j < 4; ++j)
        EXPECT_NEAR(g[j], expect[j], 1e-14);
}

TEST(LogregGradient, MatchesFiniteDifferences)
{
    const auto data = random_matrix(40, 4, 8);
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        Vector p(5);
        for (auto& v : p)
            v = rng.normal();
        const double C = 0.1 + rng.uniform() * 10.0;
        const auto g = logistic_gradient(p, data, C);
        for (size_t j = 0; j < 5; ++j) {
            const double h = 1e-6;
            Vector a = p, b = p;
            a[j] += h;
            b[j] -= h;
            const double fd = (logistic_loss(a, data, C) - logistic_loss(b, data, C)) / (2 * h);
            EXPECT_NEAR(g[j], fd, 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST(LogregGradient, VanishesAtOptimum)
{
    const auto data = random_matrix(100, 3, 10);
    const auto r = fit_logreg(data, {0.7, 1e-10, 100});
    ASSERT_TRUE(r.converged);
    Vector p = r.model.weights;
    p.push_back(r.model.bias);
    double norm = 0;
    for (double v : logistic_gradient(p, data, 0.7))
        norm += v * v;
    EXPECT_LT(std::sqrt(norm), 1e-6);
}

TEST(Serialization, RoundTripsEveryAlgorithm)
{
    const auto train = fixture::blobs(120, 1.0, 11, 2.0);
    const auto dir = fixture::temp_dir("clf");
    Rng rng(12);
    for (Algorithm a : kAllAlgorithms) {
        Hyperparams hp;
        if (a == Algorithm::rf || a == Algorithm::gbt || a == Algorithm::adaboost)
            hp["n_estimators"] = 10.0;
        const auto m = fit(ClassifierSpec(a, hp, 13), train);
        const auto path = dir / (std::string(algorithm_name(a)) + ".json");
        save_model(m, path);
        const auto back = load_model(path);
        EXPECT_EQ(back.spec(), m.spec());
        EXPECT_EQ(back.dim(), m.dim());
        for (int i = 0; i < 50; ++i) {
            const Vector x{rng.normal() * 3, rng.normal() * 3};
            EXPECT_NEAR(back.predict_proba(x), m.predict_proba(x), 1e-12) << algorithm_name(a);
        }
    }
}

TEST(Serialization, RejectsOtherFormatTags)
{
    auto j = to_json(TrainedClassifier::constant(0.3, 2));
    j["format"] = "tfidf-v1";
    try {
        classifier_from_json(j);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("tfidf-v1"), std::string::npos);
    }
}

TEST(Serialization, RejectsBackwardChildIndex)
{
    Tree t;
    t.nodes = {{0, 0.5, 0, 1, 0}, {-1, 0, -1, -1, 0.5}};
    auto j = to_json(TrainedClassifier(ClassifierSpec(Algorithm::cart), TreeModel{t, -1}, 1));
    EXPECT_THROW(classifier_from_json(j), Error);
}

TEST(Gbt, NoTreesGivesBaseRate)
{
    FeatureMatrix fm;
    for (int i = 0; i < 40; ++i)
        fm.add({static_cast<double>(i)}, i < 10 ? 1 : 0);
    const auto m = fit(ClassifierSpec(Algorithm::gbt, {{"n_estimators", 0.0}}), fm);
    EXPECT_NEAR(m.predict_proba(Vector{3.0}), 0.25, 1e-12);
}

TEST(Gbt, MaxBinWarnsAndMaxLeavesIsAlias)
{
    const auto data = fixture::blobs(100, 1.0, 14);
    const auto m = fit(ClassifierSpec(Algorithm::gbt, {{"max_bin", 15.0}, {"n_estimators", 5.0}}), data);
    ASSERT_EQ(m.warnings().size(), 1u);
    EXPECT_NE(m.warnings()[0].find("max_bin"), std::string::npos);
    const auto a = fit(ClassifierSpec(Algorithm::gbt, {{"max_leaves", 4.0}, {"n_estimators", 5.0}}), data);
    const auto b = fit(ClassifierSpec(Algorithm::gbt, {{"num_leaves", 4.0}, {"n_estimators", 5.0}}), data);
    EXPECT_EQ(a.params(), b.params());
}

TEST(AdaBoost, SingleStumpFindsBestThreshold)
{
    Rng rng(15);
    FeatureMatrix fm;
    for (int i = 0; i < 60; ++i) {
        const double x = rng.uniform() * 10;
        fm.add({x}, (x > 6.3) != rng.bernoulli(0.15) ? 1 : 0);
    }
    const auto m = fit(ClassifierSpec(Algorithm::adaboost, {{"n_estimators", 1.0}}), fm);
    size_t stump_err = 0;
    for (size_t i = 0; i < fm.size(); ++i)
        stump_err += (m.predict_proba(fm.rows[i]) > 0.5 ? 1 : 0) != fm.labels[i];
    size_t best = fm.size();
    std::vector<double> cuts = {-1.0};
    for (const auto& r : fm.rows)
        cuts.push_back(r[0]);
    for (double t : cuts)
        for (int dir = 0; dir < 2; ++dir) {
            size_t err = 0;
            for (size_t i = 0; i < fm.size(); ++i)
                err += ((fm.rows[i][0] > t) == (dir == 0) ? 1 : 0) != fm.labels[i];
            best = std::min(best, err);
        }
    EXPECT_EQ(stump_err, best);
}

TEST(Svc, SatisfiesKktConditions)
{
    const auto data = canonical_order(fixture::blobs(80, 1.0, 16, 2.0));
    Kernel k;
    k.type = KernelType::rbf;
    k.gamma = 0.5;
    SmoOptions o;
    o.C = 2.0;
    o.tol = 1e-6;
    const auto r = solve_smo(data, k, o);
    double balance = 0;
    for (size_t i = 0; i < data.size(); ++i) {
        const double yi = data.labels[i] == 1 ? 1.0 : -1.0;
        balance += yi * r.alpha[i];
        double f = -r.rho;
        for (size_t j = 0; j < data.size(); ++j)
            f += r.alpha[j] * (data.labels[j] == 1 ? 1.0 : -1.0) * k(data.rows[i], data.rows[j]);
        const double margin = yi * f;
        ASSERT_GE(r.alpha[i], 0.0);
        ASSERT_LE(r.alpha[i], o.C);
        if (r.alpha[i] < 1e-9)
            EXPECT_GE(margin, 1.0 - 1e-4);
        else if (r.alpha[i] > o.C - 1e-9)
            EXPECT_LE(margin, 1.0 + 1e-4);
        else
            EXPECT_NEAR(margin, 1.0, 1e-4);
    }
    EXPECT_NEAR(balance, 0.0, 1e-9);
}

TEST(Svc, ExceedingRowLimitFails)
{
    FeatureMatrix fm;
    for (int i = 0; i < 20001; ++i)
        fm.add({static_cast<double>(i)}, i % 2);
    EXPECT_THROW(fit(ClassifierSpec(Algorithm::svc), fm), Error);
}

TEST(Svc, MaxIterCapWarns)
{
    const auto data = fixture::blobs(200, 0.3, 17, 2.0);
    const auto m = fit(ClassifierSpec(Algorithm::svc, {{"max_iter", 3.0}}), data);
    ASSERT_FALSE(m.warnings().empty());
    EXPECT_NE(m.warnings()[0].find("max_iter"), std::string::npos);
}

TEST(Fit, RowOrderDoesNotMatter)
{
    const auto data = fixture::blobs(120, 1.0, 18, 2.0);
    auto shuffled = data;
    std::vector<size_t> perm(data.size());
    for (size_t i = 0; i < perm.size(); ++i)
        perm[i] = i;
    Rng rng(19);
    rng.shuffle(std::span<size_t>(perm));
    for (size_t i = 0; i < perm.size(); ++i) {
        shuffled.rows[i] = data.rows[perm[i]];
        shuffled.labels[i] = data.labels[perm[i]];
    }
    for (Algorithm a : kAllAlgorithms) {
        Hyperparams hp;
        if (a == Algorithm::rf || a == Algorithm::gbt)
            hp["n_estimators"] = 10.0;
        EXPECT_EQ(fit(ClassifierSpec(a, hp, 3), data), fit(ClassifierSpec(a, hp, 3), shuffled)) << algorithm_name(a);
    }
}

TEST(Fit, DeterministicPerSeed)
{
    const auto data = fixture::blobs(150, 1.0, 20, 2.0);
    for (Algorithm a : kAllAlgorithms) {
        Hyperparams hp;
        if (a == Algorithm::rf || a == Algorithm::gbt)
            hp["n_estimators"] = 10.0;
        EXPECT_EQ(to_json(fit(ClassifierSpec(a, hp, 4), data)).dump(),
                  to_json(fit(ClassifierSpec(a, hp, 4), data)).dump())
            << algorithm_name(a);
    }
}

TEST(Fit, SingleClassRejectedExceptGnbAndCart)
{
    FeatureMatrix fm;
    fm.add({1}, 0);
    fm.add({2}, 0);
    for (Algorithm a : kAllAlgorithms) {
        if (a == Algorithm::gnb || a == Algorithm::cart)
            EXPECT_NO_THROW(fit(ClassifierSpec(a), fm));
        else
            EXPECT_THROW(fit(ClassifierSpec(a), fm), Error) << algorithm_name(a);
    }
}

TEST(Fit, RejectsNonFiniteAndMismatchedInput)
{
    FeatureMatrix fm;
    fm.add({1, 2}, 0);
    fm.add({NAN, 2}, 1);
    EXPECT_THROW(fit(ClassifierSpec(Algorithm::logreg), fm), Error);
    const auto m = TrainedClassifier::constant(0.5, 2);
    EXPECT_THROW(m.predict_proba(Vector{1, 2, 3}), Error);
    EXPECT_THROW(m.predict_proba(Vector{INFINITY, 2}), Error);
}
