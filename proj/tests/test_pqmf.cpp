#include "mbc/pqmf.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <vector>

#include "doctest.h"
#include "mbc/error.hpp"
#include "mbc/rng.hpp"

using namespace mbc;

namespace {

// Reference implementations written straight from the definitions: full
// linear convolution, then keep every M-th sample (analysis) or insert M-1
// zeros and convolve (synthesis).  The library computes the same quantities
// without materializing the intermediate sequences, so agreement here checks
// the arithmetic, not the code layout.
std::vector<double> conv_full(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

std::vector<std::vector<double>> oracle_analyze(const PqmfBank& bank,
                                                std::vector<double> x) {
  const int m = bank.num_bands();
  while (x.size() % static_cast<size_t>(m) != 0) x.push_back(0.0);
  std::vector<std::vector<double>> bands(static_cast<size_t>(m));
  for (int k = 0; k < m; ++k) {
    std::vector<double> full = conv_full(x, bank.analysis[k]);
    while (full.size() % static_cast<size_t>(m) != 0) full.push_back(0.0);
    for (size_t i = 0; i < full.size(); i += static_cast<size_t>(m))
      bands[k].push_back(full[i]);
  }
  return bands;
}

std::vector<double> oracle_synthesize(const PqmfBank& bank,
                                      const std::vector<std::vector<double>>& bands) {
  const int m = bank.num_bands();
  const size_t band_len = bands[0].size();
  std::vector<double> out(band_len * m + bank.prototype.taps.size() - 1, 0.0);
  for (int k = 0; k < m; ++k) {
    std::vector<double> up(band_len * m, 0.0);
    for (size_t i = 0; i < band_len; ++i) up[i * m] = bands[k][i];
    std::vector<double> full = conv_full(up, bank.synthesis[k]);
    for (size_t n = 0; n < out.size(); ++n) out[n] += full[n];
  }
  return out;
}

std::vector<double> random_signal(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

double filter_response_mag(const std::vector<double>& taps, double omega) {
  std::complex<double> acc(0.0, 0.0);
  for (size_t n = 0; n < taps.size(); ++n)
    acc += taps[n] * std::exp(std::complex<double>(0.0, -omega * static_cast<double>(n)));
  return std::abs(acc);
}

}  // namespace

TEST_CASE("analysis matches the convolve-then-decimate definition") {
  PqmfBank bank = build_bank(design_prototype(4, 97));
  std::vector<double> x = random_signal(257, 11);

  SubbandSignal got = analyze(bank, x);
  std::vector<std::vector<double>> want = oracle_analyze(bank, x);

  REQUIRE(got.bands.size() == want.size());
  for (size_t k = 0; k < want.size(); ++k) {
    REQUIRE(got.bands[k].size() == want[k].size());
    for (size_t i = 0; i < want[k].size(); ++i)
      CHECK(got.bands[k][i] == doctest::Approx(want[k][i]).epsilon(1e-12));
  }
}

TEST_CASE("synthesis matches the upsample-then-convolve definition") {
  PqmfBank bank = build_bank(design_prototype(4, 97));
  std::vector<double> x = random_signal(256, 12);

  SubbandSignal sub = analyze(bank, x);
  std::vector<double> got = synthesize(bank, sub);
  std::vector<double> want = oracle_synthesize(bank, sub.bands);

  REQUIRE(got.size() == want.size());
  for (size_t n = 0; n < want.size(); ++n)
    CHECK(got[n] == doctest::Approx(want[n]).epsilon(1e-12));
}

TEST_CASE("analysis filters are the phased cosine modulation of the prototype") {
  const int m = 8;
  PqmfBank bank = build_bank(design_prototype(m, 481));
  const double pi = std::acos(-1.0);
  for (int k = 0; k < m; ++k) {
    const double phi = (k % 2 == 0 ? 1.0 : -1.0) * pi / 4.0;
    for (int n = 0; n < bank.num_taps(); ++n) {
      const double want =
          2.0 * bank.prototype.taps[n] * std::cos(pi / m * (k + 0.5) * n + phi);
      CHECK(bank.analysis[k][n] == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("synthesis filters are the scaled time reversal of analysis") {
  PqmfBank bank = build_bank(design_prototype(8, 481));
  const int L = bank.num_taps();
  for (int k = 0; k < bank.num_bands(); ++k)
    for (int n = 0; n < L; ++n)
      CHECK(bank.synthesis[k][n] ==
            doctest::Approx(8.0 * bank.analysis[k][L - 1 - n]).epsilon(1e-12));
}

TEST_CASE("prototype is symmetric with unit DC gain") {
  PrototypeFilter proto = design_prototype(8, 481);
  double sum = 0.0;
  for (double t : proto.taps) sum += t;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  for (int n = 0; n < proto.num_taps / 2; ++n)
    CHECK(proto.taps[n] ==
          doctest::Approx(proto.taps[proto.num_taps - 1 - n]).epsilon(1e-15));
}

TEST_CASE("product filter keeps only its center tap on the 2M grid") {
  CHECK(product_filter_secondary_ratio(design_prototype(8, 481)) < 1e-3);
  CHECK(product_filter_secondary_ratio(design_prototype(16, 481)) < 1e-3);
}

TEST_CASE("impulse round trip stays below -50 dB") {
  PqmfBank bank = build_bank(design_prototype(8, 481));
  CHECK(impulse_roundtrip_error_db(bank) <= -50.0);
  CHECK(bank.group_delay == 480);
  CHECK(bank.decimation == 8);
}

TEST_CASE("white noise round trip reconstructs to better than 50 dB") {
  PqmfBank bank = build_bank(design_prototype(8, 481));
  std::vector<double> x = random_signal(8192, 21);
  std::vector<double> y = synthesize(bank, analyze(bank, x));

  double err = 0.0, ref = 0.0;
  for (size_t n = 0; n < x.size(); ++n) {
    const double d = y[n + static_cast<size_t>(bank.group_delay)] - x[n];
    err += d * d;
    ref += x[n] * x[n];
  }
  CHECK(10.0 * std::log10(ref / err) >= 50.0);
}

TEST_CASE("a band-centered tone lands in its band") {
  const int m = 8;
  PqmfBank bank = build_bank(design_prototype(m, 481));
  const double pi = std::acos(-1.0);
  for (int k : {0, 3, 7}) {
    const double omega = pi / m * (k + 0.5);
    std::vector<double> x(8192);
    for (size_t n = 0; n < x.size(); ++n) x[n] = std::sin(omega * static_cast<double>(n));

    SubbandSignal sub = analyze(bank, x);
    // Skip the filter transient at both ends of each band signal.
    const size_t lo = 481 / m + 1;
    const size_t hi = sub.bands[0].size() - lo;
    std::vector<double> energy(m, 0.0);
    double total = 0.0;
    for (int b = 0; b < m; ++b) {
      for (size_t i = lo; i < hi; ++i) energy[b] += sub.bands[b][i] * sub.bands[b][i];
      total += energy[b];
    }
    CHECK(energy[k] / total >= 0.95);
  }
}

TEST_CASE("band 0 rejects frequencies beyond its neighbors") {
  PqmfBank bank = build_bank(design_prototype(8, 481));
  const double pi = std::acos(-1.0);
  // Passband gain near the band-0 center is 1 (prototype has unit DC gain,
  // modulation doubles one sideband).
  CHECK(filter_response_mag(bank.analysis[0], pi / 8.0 * 0.5) ==
        doctest::Approx(1.0).epsilon(0.05));
  for (double omega = 2.5 * pi / 8.0; omega < pi; omega += pi / 64.0)
    CHECK(filter_response_mag(bank.analysis[0], omega) < 1e-2);
}

TEST_CASE("analysis is linear") {
  PqmfBank bank = build_bank(design_prototype(4, 97));
  std::vector<double> x = random_signal(256, 31);
  std::vector<double> w = random_signal(256, 32);
  std::vector<double> mix(256);
  for (size_t n = 0; n < mix.size(); ++n) mix[n] = 0.7 * x[n] - 1.3 * w[n];

  SubbandSignal sx = analyze(bank, x);
  SubbandSignal sw = analyze(bank, w);
  SubbandSignal sm = analyze(bank, mix);
  for (size_t k = 0; k < sm.bands.size(); ++k)
    for (size_t i = 0; i < sm.bands[k].size(); ++i)
      CHECK(sm.bands[k][i] ==
            doctest::Approx(0.7 * sx.bands[k][i] - 1.3 * sw.bands[k][i])
                .epsilon(1e-12));
}

TEST_CASE("filter text files round-trip bit for bit") {
  PrototypeFilter proto = design_prototype(8, 481);
  const std::string path = "pqmf_roundtrip_test.txt";
  save_filter_text(proto, path);
  PrototypeFilter back = load_filter_text(path);
  std::remove(path.c_str());

  CHECK(back.num_bands == proto.num_bands);
  CHECK(back.num_taps == proto.num_taps);
  CHECK(back.cutoff == proto.cutoff);
  for (int n = 0; n < proto.num_taps; ++n) CHECK(back.taps[n] == proto.taps[n]);
}

TEST_CASE("hopeless tap budgets are rejected") {
  CHECK_THROWS_WITH_AS(design_prototype(8, 33), doctest::Contains("insufficient-taps"),
                       Error);
  CHECK_THROWS_AS(design_prototype(1, 481), Error);
}

TEST_CASE("degenerate inputs are rejected") {
  PqmfBank bank = build_bank(design_prototype(4, 97));
  CHECK_THROWS_AS(analyze(bank, std::vector<double>{}), Error);
  SubbandSignal empty;
  empty.bands.resize(4);
  CHECK_THROWS_AS(synthesize(bank, empty), Error);
  SubbandSignal wrong;
  wrong.bands.resize(3, std::vector<double>(8, 0.0));
  CHECK_THROWS_AS(synthesize(bank, wrong), Error);
}
