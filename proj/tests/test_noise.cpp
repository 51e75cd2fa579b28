#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "eegdec/ising.hpp"
#include "eegdec/noise.hpp"

namespace eegdec {
namespace {

BitVector pauli_at(std::size_t N, std::size_t loc, int kind) {
    BitVector e(2 * N);
    if (kind & 1) e.set(loc);
    if (kind & 2) e.set(N + loc);
    return e;
}

TEST(HalfLlr, Values) {
    EXPECT_NEAR(half_llr(0.05), 1.4722, 1e-4);
    EXPECT_DOUBLE_EQ(half_llr(0.5), 0.0);
    EXPECT_NEAR(half_llr(0.1), std::log(9.0) / 2, 1e-15);
}

TEST(Depolarizing, Coefficients) {
    ErrorModel m = depolarizing(2, 0.05);
    ASSERT_EQ(m.bonds(), 6u);
    for (double k : m.K) EXPECT_NEAR(k, std::log(57.0) / 4, 1e-15);
    EXPECT_NEAR(depolarizing(1, 0.75).K[0], 0.0, 1e-15);
}

TEST(Depolarizing, SingleLocationMarginal) {
    for (double p : {0.01, 0.1, 0.3, 0.75}) {
        ErrorModel m = depolarizing(1, p);
        double w[4], total = 0;
        for (int k = 0; k < 4; ++k) total += w[k] = std::exp(m.energy(pauli_at(1, 0, k)));
        for (int k = 1; k < 4; ++k) EXPECT_NEAR(w[k] / total, p / 3, 1e-14);
        auto dist = location_distributions(m);
        for (int k = 1; k < 4; ++k) EXPECT_NEAR(dist[0][k], p / 3, 1e-14);
        EXPECT_NEAR(dist[0][0], 1 - p, 1e-14);
    }
}

TEST(IidXz, Distribution) {
    ErrorModel m = iid_xz(1, 0.1, 0.2);
    auto d = location_distributions(m)[0];
    EXPECT_NEAR(d[0], 0.9 * 0.8, 1e-14);
    EXPECT_NEAR(d[1], 0.1 * 0.8, 1e-14);
    EXPECT_NEAR(d[2], 0.9 * 0.2, 1e-14);
    EXPECT_NEAR(d[3], 0.1 * 0.2, 1e-14);
}

TEST(Correlation, Bookkeeping) {
    ErrorModel m = iid_xz(2, 0.1, 0.1);
    ErrorModel c = add_correlation(m, {0, 1}, 0.3);
    EXPECT_EQ(c.bonds(), m.bonds() + 1);
    EXPECT_FALSE(is_product_form(c));
    EXPECT_TRUE(is_product_form(m));
    EXPECT_THROW(location_distributions(c), std::invalid_argument);
    EXPECT_THROW(add_correlation(m, {}, 0.3), std::invalid_argument);
}

TEST(Correlation, JointFlipBecomesLikelier) {
    ErrorModel base = iid_xz(2, 0.1, 0.1);
    ErrorModel corr = add_correlation(base, {0, 1}, 0.5);
    auto joint = [](const ErrorModel &m) {
        double both = 0, total = 0;
        for (std::uint64_t x = 0; x < 16; ++x) {
            BitVector e = BitVector::from_uint(4, x);
            double w = std::exp(m.energy(e));
            total += w;
            if (e.get(0) && e.get(1)) both += w;
        }
        return both / total;
    };
    EXPECT_GT(joint(corr), joint(base));
    EXPECT_NEAR(prob_of_error(corr, BitVector::from_string("1100")),
                std::exp(corr.energy(BitVector::from_string("1100")) - log_normalizer(corr)), 1e-14);
}

TEST(Sampler, TinyProbabilityGivesZero) {
    ErrorModel m = depolarizing(50, 1e-12);
    std::mt19937_64 rng(1);
    for (int t = 0; t < 100; ++t) EXPECT_TRUE(sample_error(m, rng).none());
}

TEST(Sampler, UniformDepolarizing) {
    ErrorModel m = depolarizing(1, 0.75);
    ErrorSampler s(m);
    std::mt19937_64 rng(12345);
    const int draws = 100000;
    int counts[4] = {0, 0, 0, 0};
    for (int t = 0; t < draws; ++t) {
        BitVector e = s.sample(rng);
        counts[e.get(0) + 2 * e.get(1)]++;
    }
    const double mean = draws / 4.0, sd = std::sqrt(draws * 0.25 * 0.75);
    for (int k = 0; k < 4; ++k) EXPECT_LT(std::abs(counts[k] - mean), 3 * sd) << k;
}

TEST(Sampler, IidRates) {
    ErrorModel m = iid_xz(20, 0.1, 0.3);
    ErrorSampler s(m);
    std::mt19937_64 rng(7);
    const int draws = 20000;
    double nx = 0, nz = 0;
    for (int t = 0; t < draws; ++t) {
        BitVector e = s.sample(rng);
        nx += e.slice(0, 20).popcount();
        nz += e.slice(20, 20).popcount();
    }
    const double n = 20.0 * draws;
    EXPECT_NEAR(nx / n, 0.1, 3 * std::sqrt(0.1 * 0.9 / n));
    EXPECT_NEAR(nz / n, 0.3, 3 * std::sqrt(0.3 * 0.7 / n));
}

TEST(Sampler, Deterministic) {
    ErrorModel m = depolarizing(30, 0.1);
    std::mt19937_64 a(99), b(99);
    for (int t = 0; t < 50; ++t) EXPECT_EQ(sample_error(m, a), sample_error(m, b));
}

TEST(Sampler, RejectsCorrelatedModel) {
    ErrorModel c = add_correlation(iid_xz(2, 0.1, 0.1), {0, 1}, 0.3);
    EXPECT_THROW(ErrorSampler{c}, std::invalid_argument);
}

TEST(ModelFile, RoundTrip) {
    ErrorModel m = add_correlation(depolarizing(3, 0.02), {0, 4}, -0.25);
    std::stringstream s;
    write_model_file(s, m);
    ErrorModel back = read_model_file(s, 3);
    ASSERT_EQ(back.bonds(), m.bonds());
    for (std::size_t b = 0; b < m.bonds(); ++b) {
        EXPECT_EQ(back.columns[b], m.columns[b]);
        EXPECT_DOUBLE_EQ(back.K[b], m.K[b]);
    }
}

TEST(ModelFile, Errors) {
    std::stringstream bad("K 0.5 4:X\n");
    EXPECT_THROW(read_model_file(bad, 3), std::invalid_argument);
    std::stringstream junk("L 0.5 1:X\n");
    EXPECT_THROW(read_model_file(junk, 3), std::invalid_argument);
}

TEST(ModelSpec, Parse) {
    EXPECT_EQ(parse_model_spec("iid:0.1", 4).form, ModelForm::iid_xz);
    EXPECT_EQ(parse_model_spec("depol:0.1", 4).bonds(), 12u);
    EXPECT_THROW(parse_model_spec("gauss:0.1", 4), std::invalid_argument);
    EXPECT_THROW(parse_model_spec("iid", 4), std::invalid_argument);
    EXPECT_THROW(parse_model_spec("iid:1.5", 4), std::invalid_argument);
    auto path = std::filesystem::temp_directory_path() / "eegdec_model_spec_test.txt";
    {
        std::ofstream out(path);
        out << "# one correlated pair\nK 0.7 1:X,2:Z\n";
    }
    ErrorModel m = parse_model_spec("file:" + path.string(), 2);
    ASSERT_EQ(m.bonds(), 1u);
    EXPECT_EQ(m.columns[0].support(), (std::vector<std::size_t>{0, 3}));
    std::filesystem::remove(path);
}

}  // namespace
}  // namespace eegdec
