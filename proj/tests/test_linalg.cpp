// SPDX-License-Identifier: Apache-2.0
#include "helpers.hpp"
#include "mmimo/linalg.hpp"
#include "mmimo/parallel.hpp"
#include "mmimo/rng.hpp"

#include <catch_amalgamated.hpp>

#include <atomic>
#include <numeric>

using namespace mmimo;
using namespace mmimo::testing;

TEST_CASE("hermitian_eigen reconstructs the input with ascending spectrum") {
    RngStream rng(7);
    const CMatrix a = random_psd(12, 5, rng);
    const HermitianEigen e = hermitian_eigen(a);
    for (Eigen::Index i = 1; i < e.values.size(); ++i) CHECK(e.values(i) >= e.values(i - 1));
    CHECK((from_spectrum(e.vectors, e.values) - a).norm() <= 1e-12 * a.norm());
    CHECK((e.vectors.adjoint() * e.vectors - CMatrix::Identity(12, 12)).norm() <= 1e-12);
}

TEST_CASE("symmetrize and hermitian_defect") {
    CMatrix a(2, 2);
    a << cd(1, 0), cd(2, 1), cd(0, 0), cd(3, 0);
    CHECK(hermitian_defect(a) > 1.0);
    symmetrize(a);
    CHECK(hermitian_defect(a) == 0.0);
    CHECK(a(0, 1) == cd(1, 0.5));
}

TEST_CASE("trace_product equals the trace of the explicit product") {
    RngStream rng(3);
    CMatrix a(6, 6), b(6, 6);
    rng.fill_complex_normal(a);
    rng.fill_complex_normal(b);
    CHECK(trace_product(a, b) == Catch::Approx((a * b).trace().real()).epsilon(1e-13));
}

TEST_CASE("pairwise_sum matches an extended-precision oracle") {
    RngStream rng(11);
    std::vector<double> v(10007);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0) * std::pow(10.0, rng.uniform(-3.0, 3.0));
    long double oracle = 0.0L;
    for (double x : v) oracle += static_cast<long double>(x);
    CHECK(std::abs(pairwise_sum(v) - static_cast<double>(oracle)) <= 1e-12 * std::abs(static_cast<double>(oracle)) + 1e-12);
    CHECK(pairwise_sum(std::span<const double>{}) == 0.0);
}

TEST_CASE("hermitian_factor rejects an indefinite matrix") {
    CMatrix a = CMatrix::Identity(3, 3);
    a(2, 2) = -1.0;
    CHECK_THROWS_AS(hermitian_factor(a), NumericalError);
    CHECK_NOTHROW(hermitian_factor(CMatrix::Identity(3, 3)));
}

TEST_CASE("SystemConfig validation names the violated constraint") {
    SystemConfig c;
    c.n_antennas = 8;
    c.n_users = 4;
    c.coherence_len = 20;
    c.training_len = 4;
    CHECK_NOTHROW(c.validate());
    c.training_len = 3;
    try {
        c.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "tau");
        CHECK(std::string(e.what()).find("K ≤ τ") != std::string::npos);
    }
    c.training_len = 20;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.training_len = 4;
    c.snr_data = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.snr_data = 1.0;
    c.snr_training = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(SystemConfig{8, 4, 1, 20, 5}.prelog() == Catch::Approx(0.75));
}

TEST_CASE("in_log_base and db_to_linear") {
    CHECK(in_log_base(std::log(8.0), LogBase::base2) == Catch::Approx(3.0));
    CHECK(in_log_base(1.5, LogBase::natural) == 1.5);
    CHECK(db_to_linear(10.0) == Catch::Approx(10.0));
    CHECK(db_to_linear(-10.0) == Catch::Approx(0.1));
}

TEST_CASE("RngStream is reproducible and substreams are distinct") {
    RngStream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
    RngStream s1 = RngStream::substream(42, StreamTag::trial, 0);
    RngStream s2 = RngStream::substream(42, StreamTag::trial, 1);
    RngStream s3 = RngStream::substream(42, StreamTag::geometry, 0);
    const double x1 = s1.uniform(), x2 = s2.uniform(), x3 = s3.uniform();
    CHECK(x1 != x2);
    CHECK(x1 != x3);
    CHECK(RngStream::substream(42, StreamTag::trial, 1).uniform() == x2);
}

TEST_CASE("complex_normal has unit variance split evenly") {
    RngStream rng(5);
    const int n = 200000;
    double re2 = 0.0, im2 = 0.0, abs2 = 0.0;
    cd mean = 0.0;
    for (int i = 0; i < n; ++i) {
        const cd z = rng.complex_normal();
        mean += z;
        re2 += z.real() * z.real();
        im2 += z.imag() * z.imag();
        abs2 += std::norm(z);
    }
    CHECK(std::abs(mean / double(n)) < 5.0 / std::sqrt(double(n)));
    CHECK(abs2 / n == Catch::Approx(1.0).margin(0.02));
    CHECK(re2 / n == Catch::Approx(0.5).margin(0.01));
    CHECK(im2 / n == Catch::Approx(0.5).margin(0.01));
}

TEST_CASE("parallel_for visits every index once and propagates exceptions") {
    for (unsigned workers : {1u, 3u}) {
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), workers, [&](std::size_t i) { hits[i]++; });
        for (auto& h : hits) CHECK(h.load() == 1);
        CHECK_THROWS_AS(parallel_for(50, workers,
                                     [](std::size_t i) {
                                         if (i == 17) throw std::runtime_error("boom");
                                     }),
                        std::runtime_error);
    }
    CHECK(default_workers() >= 1);
}
