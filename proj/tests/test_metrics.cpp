#include "respi/metrics.hpp"

#include <doctest.h>

using namespace respi;

namespace {

// 2x2 confusion matrix with the positive class at index 0.
ConfusionMatrix binary(long tp, long fn, long fp, long tn) {
    ConfusionMatrix conf({"pos", "neg"});
    conf.counts(0, 0) = static_cast<int>(tp);
    conf.counts(0, 1) = static_cast<int>(fn);
    conf.counts(1, 0) = static_cast<int>(fp);
    conf.counts(1, 1) = static_cast<int>(tn);
    return conf;
}

}  // namespace

TEST_CASE("metrics on a perfect classifier") {
    const auto m = metrics(binary(2, 0, 0, 2), 0);
    CHECK(m.accuracy == doctest::Approx(1.0));
    REQUIRE(m.sensitivity.has_value());
    REQUIRE(m.specificity.has_value());
    CHECK(*m.sensitivity == doctest::Approx(1.0));
    CHECK(*m.specificity == doctest::Approx(1.0));
}

TEST_CASE("metrics with an empty negative side") {
    // TP=3, TN=0, FP=0, FN=1.
    const auto m = metrics(binary(3, 1, 0, 0), 0);
    CHECK(m.accuracy == doctest::Approx(0.75));
    REQUIRE(m.sensitivity.has_value());
    CHECK(*m.sensitivity == doctest::Approx(0.75));
    CHECK_FALSE(m.specificity.has_value());
}

TEST_CASE("metrics on an all-wrong classifier") {
    // TP=0, TN=0, FP=3, FN=1.
    const auto m = metrics(binary(0, 1, 3, 0), 0);
    CHECK(m.accuracy == doctest::Approx(0.0));
}

TEST_CASE("metrics rejects unknown classes") {
    const auto conf = binary(1, 1, 1, 1);
    CHECK_THROWS_AS(metrics(conf, 5), std::invalid_argument);
    CHECK_THROWS_AS(metrics(conf, std::string("bogus")), std::invalid_argument);
}

TEST_CASE("one-vs-rest accuracy equals trace/total for two classes") {
    const auto conf = binary(7, 2, 3, 11);
    CHECK(metrics(conf, 0).accuracy == doctest::Approx(overall_accuracy(conf)));
    CHECK(metrics(conf, 1).accuracy == doctest::Approx(overall_accuracy(conf)));
}

TEST_CASE("three-class one-vs-rest reduction") {
    ConfusionMatrix conf({"a", "b", "c"});
    // rows true, columns predicted
    conf.counts << 5, 1, 0,
                   2, 6, 1,
                   0, 0, 9;
    const auto counts_a = one_vs_rest(conf, 0);
    CHECK(counts_a.tp == 5);
    CHECK(counts_a.fn == 1);
    CHECK(counts_a.fp == 2);
    CHECK(counts_a.tn == 16);
    CHECK(conf.total() == 24);
    const auto m = metrics(conf, std::string("a"));
    CHECK(m.accuracy == doctest::Approx(21.0 / 24.0));
    CHECK(*m.sensitivity == doctest::Approx(5.0 / 6.0));
    CHECK(*m.specificity == doctest::Approx(16.0 / 18.0));
}
