#include "oracles.hpp"

#include "trdma/channel.hpp"
#include "trdma/precoder.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace trdma;
using oracle::cd;

namespace {

Cir cir(std::vector<cd> taps) { return Cir{ComplexSignal(std::move(taps)), 0.0}; }

Cir random_cir(std::mt19937_64& rng, std::size_t taps) { return cir(oracle::random_samples(rng, taps)); }

UserStream stream(std::size_t id, std::vector<cd> symbols, const Cir& h) {
    return UserStream{id, std::move(symbols), tr_filter(h)};
}

}  // namespace

TEST_CASE("tr_filter") {
    const TrFilter one = tr_filter(cir({1}));
    CHECK(one.taps.samples() == std::vector<cd>{1});
    CHECK(one.source_norm == 1.0);

    const TrFilter f = tr_filter(cir({3, cd{0, 4}}));
    CHECK(f.source_norm == 5.0);
    CHECK(std::abs(f.taps[0] - cd{0, -0.8}) < 1e-15);
    CHECK(std::abs(f.taps[1] - cd{0.6, 0}) < 1e-15);

    std::mt19937_64 rng(1);
    for (std::size_t n = 1; n <= 128; n += 9) {
        const Cir h = random_cir(rng, n);
        const TrFilter r = tr_filter(h);
        CHECK(std::abs(oracle::energy(r.taps.samples()) - 1.0) < 1e-12);
        CHECK(r.source_norm == doctest::Approx(std::sqrt(oracle::energy(h.taps.samples()))).epsilon(1e-14));
    }
    CHECK_THROWS_AS(tr_filter(cir({0, 0})), std::invalid_argument);
}

TEST_CASE("precode_multiuser: worked examples") {
    SUBCASE("single tap, single symbol") {
        const ComplexSignal s = precode_multiuser({stream(0, {1}, cir({1}))}, 1);
        CHECK(s.samples() == std::vector<cd>{1});
    }
    SUBCASE("orthogonal two-tap responses superpose") {
        const Cir h1 = cir({1, 0});
        const Cir h2 = cir({0, 1});
        const ComplexSignal s = precode_multiuser({stream(0, {1}, h1), stream(1, {1}, h2)}, 1);
        ComplexSignal expected = tr_filter(h1).taps;
        expected += tr_filter(h2).taps;
        CHECK(s == expected);
        CHECK(s.samples() == std::vector<cd>{1, 1});
    }
    SUBCASE("matches the sample-by-sample oracle") {
        std::mt19937_64 rng(2);
        const std::vector<Cir> hs{random_cir(rng, 20), random_cir(rng, 20), random_cir(rng, 20)};
        const std::vector<std::vector<cd>> xs{oracle::random_samples(rng, 7), oracle::random_samples(rng, 4),
                                              oracle::random_samples(rng, 9)};
        std::vector<UserStream> streams;
        for (std::size_t i = 0; i < 3; ++i) streams.push_back(stream(i, xs[i], hs[i]));
        const ComplexSignal s = precode_multiuser(streams, 5);
        const ComplexSignal y = apply_channel(s, hs[1], 0.0, RngSeed{1});
        const auto expected = oracle::tr_reception(xs, {hs[0].taps.samples(), hs[1].taps.samples(),
                                                        hs[2].taps.samples()},
                                                   5, 1);
        REQUIRE(y.size() == expected.size());
        CHECK(oracle::relative_error(y.samples(), expected) < 1e-12);
    }
    SUBCASE("input validation") {
        std::mt19937_64 rng(3);
        CHECK_THROWS_AS(precode_multiuser({stream(0, {1}, random_cir(rng, 4)), stream(1, {1}, random_cir(rng, 5))}, 2),
                        std::invalid_argument);
        CHECK_THROWS_AS(precode_multiuser({stream(0, {1}, random_cir(rng, 4))}, 0), std::invalid_argument);
        CHECK_THROWS_AS(precode_multiuser({}, 1), std::invalid_argument);
    }
}

TEST_CASE("focusing identity: single-symbol reception peaks at |h| at L - 1") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::size_t> len(1, 128);
    for (int trial = 0; trial < 200; ++trial) {
        const Cir h = random_cir(rng, len(rng));
        const ComplexSignal y = apply_channel(precode_multiuser({stream(0, {1}, h)}, 1), h, 0.0, RngSeed{1});
        const double norm = std::sqrt(oracle::energy(h.taps.samples()));
        const cd peak = y[focusing_instant(h.size())];
        CHECK(std::abs(peak - norm) <= 1e-9 * norm);
        for (const auto& s : y) CHECK(std::abs(s) <= std::abs(peak) * (1 + 1e-12));
    }
}

TEST_CASE("per-user transmitted energy equals symbol energy when D >= L") {
    std::mt19937_64 rng(5);
    for (std::size_t taps : {1, 8, 33}) {
        const Cir h = random_cir(rng, taps);
        const auto x = oracle::random_samples(rng, 12);
        for (std::size_t d : {taps, taps + 3, 2 * taps}) {
            const ComplexSignal s = precode_multiuser({stream(0, x, h)}, d);
            CHECK(energy(s) == doctest::Approx(oracle::energy(x)).epsilon(1e-9));
        }
    }
}

TEST_CASE("correlation_function") {
    SUBCASE("zero lag of [3, 4i]") {
        const Cir h = cir({3, cd{0, 4}});
        const ComplexSignal r = correlation_function(h, h);
        REQUIRE(r.size() == 3);
        CHECK(r[1] == cd{5.0, 0.0});
        CHECK(correlation_at(r, 0) == cd{5.0, 0.0});
    }
    SUBCASE("matches the direct sum at every lag") {
        std::mt19937_64 rng(6);
        for (int trial = 0; trial < 20; ++trial) {
            const Cir hj = random_cir(rng, 16);
            const Cir hi = random_cir(rng, 16);
            const ComplexSignal r = correlation_function(hj, hi);
            REQUIRE(r.size() == 31);
            for (long k = -15; k <= 15; ++k) {
                const cd expected = oracle::correlation(hj.taps.samples(), hi.taps.samples(), k);
                CHECK(std::abs(r[static_cast<std::size_t>(k + 15)] - expected) < 1e-12);
                CHECK(correlation_at(r, k) == r[static_cast<std::size_t>(k + 15)]);
            }
            CHECK(correlation_at(r, 16) == cd{});
            CHECK(correlation_at(r, -16) == cd{});
        }
    }
    SUBCASE("autocorrelation is maximal at zero lag") {
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 50; ++trial) {
            const Cir h = random_cir(rng, 1 + trial);
            const ComplexSignal r = correlation_function(h, h);
            const double norm = std::sqrt(oracle::energy(h.taps.samples()));
            const cd zero = correlation_at(r, 0);
            CHECK(zero.imag() == 0.0);
            CHECK(std::abs(zero.real() - norm) <= 4 * std::numeric_limits<double>::epsilon() * norm);
            for (const auto& s : r) CHECK(std::abs(s) <= zero.real() * (1 + 1e-12));
        }
    }
    SUBCASE("conjugate symmetry with mirrored lag") {
        std::mt19937_64 rng(8);
        for (int trial = 0; trial < 50; ++trial) {
            const Cir hi = random_cir(rng, 24);
            const Cir hj = random_cir(rng, 24);
            const double ni = std::sqrt(oracle::energy(hi.taps.samples()));
            const double nj = std::sqrt(oracle::energy(hj.taps.samples()));
            const ComplexSignal rji = correlation_function(hj, hi);
            const ComplexSignal rij = correlation_function(hi, hj);
            for (long k = -23; k <= 23; ++k) {
                const cd lhs = ni * correlation_at(rji, k);
                const cd rhs = std::conj(nj * correlation_at(rij, -k));
                CHECK(std::abs(lhs - rhs) < 1e-9);
            }
        }
    }
    SUBCASE("same-lag symmetry fails off zero lag") {
        // h = [1, i]: sum_n conj(h[n+1]) h[n] = -i, its conjugate at the same lag is +i.
        const Cir h = cir({1, cd{0, 1}});
        const ComplexSignal r = correlation_function(h, h);
        CHECK(std::abs(correlation_at(r, 1) - std::conj(correlation_at(r, 1))) > 1.0);
        CHECK(std::abs(correlation_at(r, 1) - std::conj(correlation_at(r, -1))) < 1e-15);
    }
    CHECK_THROWS_AS(correlation_function(cir({1}), cir({0})), std::invalid_argument);
    CHECK_THROWS_AS(correlation_function(Cir{}, cir({1})), std::invalid_argument);
}

TEST_CASE("decompose_reception") {
    SUBCASE("single user, single symbol has no interference") {
        std::mt19937_64 rng(9);
        const Cir h = random_cir(rng, 16);
        const auto parts = decompose_reception({stream(0, {cd{0.5, 2}}, h)}, {h}, 3, 0, {0});
        REQUIRE(parts.size() == 1);
        CHECK(parts[0].isi == cd{});
        CHECK(parts[0].iui == cd{});
        CHECK(std::abs(parts[0].signal - cd{0.5, 2} * std::sqrt(energy(h.taps))) < 1e-12);
    }
    SUBCASE("no ISI once D >= 2L - 1") {
        std::mt19937_64 rng(10);
        const Cir h = random_cir(rng, 12);
        const auto x = oracle::random_samples(rng, 10);
        std::vector<std::size_t> idx(10);
        for (std::size_t k = 0; k < 10; ++k) idx[k] = k;
        for (const auto& p : decompose_reception({stream(0, x, h)}, {h}, 23, 0, idx)) CHECK(p.isi == cd{});
    }
    SUBCASE("disjoint single-tap responses against the full convolution") {
        const Cir h1 = cir({1, 0, 0, 0});
        const Cir h2 = cir({0, cd{0, 2}, 0, 0});
        const std::vector<std::vector<cd>> xs{{1, -1, 1}, {cd{0, 1}, 1, 1}};
        const std::vector<UserStream> streams{stream(0, xs[0], h1), stream(1, xs[1], h2)};
        const auto y = oracle::tr_reception(xs, {h1.taps.samples(), h2.taps.samples()}, 2, 0);
        const auto parts = decompose_reception(streams, {h1, h2}, 2, 0, {0, 1, 2});
        double iui_power = 0.0;
        for (const auto& p : parts) {
            CHECK(std::abs(p.total() - y[p.symbol_index * 2 + 3]) < 1e-12);
            iui_power += std::norm(p.iui);
        }
        // The two responses only correlate at lag 1, which a D = 2 grid never
        // samples.
        CHECK(iui_power == 0.0);
    }
    SUBCASE("random instances against direct simulation and the oracle") {
        std::mt19937_64 rng(11);
        std::uniform_int_distribution<std::size_t> users(1, 3), taps(1, 32), backoff(1, 40), symbols(1, 12);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = users(rng), l = taps(rng), d = backoff(rng);
            std::vector<Cir> hs;
            std::vector<std::vector<cd>> xs, raw;
            std::vector<UserStream> streams;
            for (std::size_t i = 0; i < n; ++i) {
                hs.push_back(random_cir(rng, l));
                xs.push_back(oracle::random_samples(rng, symbols(rng)));
                raw.push_back(hs.back().taps.samples());
                streams.push_back(stream(i, xs.back(), hs.back()));
            }
            const std::size_t target = trial % n;
            std::size_t longest = 0;
            for (const auto& x : xs) longest = std::max(longest, x.size());
            std::vector<std::size_t> idx(longest);
            for (std::size_t k = 0; k < longest; ++k) idx[k] = k;

            const ComplexSignal y = apply_channel(precode_multiuser(streams, d), hs[target], 0.0, RngSeed{1});
            const auto oracle_y = oracle::tr_reception(xs, raw, d, target);
            for (const auto& p : decompose_reception(streams, hs, d, target, idx)) {
                const std::size_t t = p.symbol_index * d + l - 1;
                const double scale = std::max(1.0, std::abs(oracle_y[t]));
                CHECK(std::abs(p.total() - y[t]) <= 1e-9 * scale);
                CHECK(std::abs(p.total() - oracle_y[t]) <= 1e-9 * scale);
            }
        }
    }
    SUBCASE("input validation") {
        const Cir h = cir({1, 2});
        CHECK_THROWS_AS(decompose_reception({stream(0, {1}, h)}, {}, 1, 0, {0}), std::invalid_argument);
        CHECK_THROWS_AS(decompose_reception({stream(0, {1}, h)}, {h}, 1, 1, {0}), std::invalid_argument);
        CHECK_THROWS_AS(decompose_reception({stream(0, {1}, h)}, {h}, 0, 0, {0}), std::invalid_argument);
    }
}

TEST_CASE("chirp_spread_filter") {
    SUBCASE("unit filter gives the normalised chirp") {
        const ComplexSignal s = chirp_spread_filter(tr_filter(cir({1})), ChirpSpec{8, 1.0});
        const ComplexSignal c = normalize_unit_energy(make_chirp({8, 1.0}));
        CHECK(oracle::relative_error(s.samples(), c.samples()) < 1e-14);
    }
    SUBCASE("length and energy") {
        std::mt19937_64 rng(12);
        const ComplexSignal s = chirp_spread_filter(tr_filter(random_cir(rng, 64)), ChirpSpec{300, 1.0});
        CHECK(s.size() == 300 + 64 - 1);
        CHECK(energy(s) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("de-spreading gives the TR reception shaped by the chirp autocorrelation") {
        // correlate(spread (*) h, chirp) = (filter (*) h) (*) acf(chirp) / |filter (*) chirp|,
        // every factor computed here by direct sums.
        std::mt19937_64 rng(13);
        const std::size_t tau = 256;
        const Cir h = random_cir(rng, 32);
        const TrFilter f = tr_filter(h);
        const auto chirp = make_chirp({tau, 1.0}).samples();

        const ComplexSignal spread = chirp_spread_filter(f, {tau, 1.0});
        const ComplexSignal out = cross_correlate(apply_channel(spread, h, 0.0, RngSeed{1}), ComplexSignal(chirp));

        const auto tr = oracle::convolve(f.taps.samples(), h.taps.samples());
        const auto acf = oracle::cross_correlate(chirp, chirp);
        const double norm = std::sqrt(oracle::energy(oracle::convolve(f.taps.samples(), chirp)));
        auto expected = oracle::convolve(tr, acf);
        for (auto& s : expected) s /= norm;
        REQUIRE(out.size() == expected.size());
        CHECK(oracle::relative_error(out.samples(), expected) < 1e-6);

        // The focusing peak lands at L - 1 + tau_c - 1 and carries tau_c |h| / norm.
        const cd peak = out[focusing_instant(h.size()) + tau - 1];
        const double main_lobe = tau * std::sqrt(energy(h.taps)) / norm;
        CHECK(std::abs(peak) == doctest::Approx(main_lobe).epsilon(0.05));
    }
}
