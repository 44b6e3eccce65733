#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "fixtures.hpp"
#include "mlmc_seis/data.hpp"
#include "mlmc_seis/error.hpp"

using namespace mlmcseis;
using mlmcseis::testing::small_setup;
using mlmcseis::testing::solve;

namespace {

SynthRequest small_request(double sigma, std::uint64_t seed = 3) {
  const auto s = small_setup();
  SynthRequest req;
  req.source = s.source;
  req.material = nominal_material(s.medium);
  req.geometry = s.geometry;
  req.options = s.options;
  req.fine_level = 1;
  req.hierarchy_max = 0;
  req.rate = 20.0;
  req.sigma = sigma;
  req.seed = seed;
  return req;
}

DataSet zeros(std::size_t receivers, std::size_t samples) {
  DataSet d;
  for (std::size_t r = 0; r < receivers; ++r) {
    Seismogram s;
    s.receiver = static_cast<int>(r);
    s.grid = TimeGrid{0, 0.01, samples};
    s.ux.assign(samples, 0.0);
    s.uz.assign(samples, 0.0);
    d.traces.push_back(s);
  }
  return d;
}

}  // namespace

TEST(Synthetic, NoiselessDataAreTheRestrictedFineSolve) {
  const auto s = small_setup();
  const auto req = small_request(0.0);
  const auto data = generate_synthetic(req, s.medium);
  const auto fine = solve(s, req.material, 1);
  ASSERT_EQ(data.traces.size(), fine.size());
  EXPECT_EQ(data.grid().start(), 0.0);
  EXPECT_DOUBLE_EQ(data.horizon(), s.source.horizon);
  EXPECT_EQ(data.grid().count, 81u);
  for (std::size_t r = 0; r < fine.size(); ++r)
    for (std::size_t k = 0; k < data.grid().count; ++k) {
      const auto j = static_cast<std::size_t>(static_cast<std::int64_t>(2 * k) - fine[r].grid.first);
      EXPECT_EQ(data.traces[r].ux[k], fine[r].ux[j]);
      EXPECT_EQ(data.traces[r].uz[k], fine[r].uz[j]);
    }
}

TEST(Synthetic, RegenerationIsBitIdentical) {
  const auto s = small_setup();
  const auto a = generate_synthetic(small_request(1e-4, 9), s.medium);
  const auto b = generate_synthetic(small_request(1e-4, 9), s.medium);
  EXPECT_EQ(a.metadata, b.metadata);
  for (std::size_t r = 0; r < a.traces.size(); ++r) {
    EXPECT_EQ(a.traces[r].ux, b.traces[r].ux);
    EXPECT_EQ(a.traces[r].uz, b.traces[r].uz);
  }
  const auto c = generate_synthetic(small_request(1e-4, 10), s.medium);
  EXPECT_NE(a.traces[0].ux, c.traces[0].ux);
}

TEST(Synthetic, RejectsIncompatibleRequests) {
  const auto s = small_setup();
  auto req = small_request(0.0);
  req.rate = 15.0;
  EXPECT_THROW(generate_synthetic(req, s.medium), ConfigError);
  req = small_request(0.0);
  req.hierarchy_max = 1;
  EXPECT_THROW(generate_synthetic(req, s.medium), ConfigError);
  req = small_request(-1.0);
  EXPECT_THROW(generate_synthetic(req, s.medium), ConfigError);
}

TEST(Noise, EmpiricalVarianceMatchesSigmaSquared) {
  auto d = zeros(2, 2500);
  const double sigma = 2.5e-3;
  add_noise(d, sigma, 42);
  double sum = 0.0, sumsq = 0.0;
  std::size_t n = 0;
  for (const auto& tr : d.traces)
    for (const auto* v : {&tr.ux, &tr.uz})
      for (double x : *v) sum += x, sumsq += x * x, ++n;
  ASSERT_EQ(n, 10000u);
  const double mean = sum / n;
  const double var = (sumsq - n * mean * mean) / (n - 1);
  EXPECT_NEAR(var / (sigma * sigma), 1.0, 0.05);
}

TEST(Noise, ResidualsAreWhite) {
  auto d = zeros(1, 20000);
  add_noise(d, 1.0, 7);
  const auto& x = d.traces[0].uz;
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    den += x[k] * x[k];
    if (k > 0) num += x[k] * x[k - 1];
  }
  EXPECT_LE(std::abs(num / den), 3.0 / std::sqrt(static_cast<double>(x.size())));
}

TEST(DataFile, RoundTripKeepsValuesAndMetadata) {
  const auto s = small_setup();
  const auto data = generate_synthetic(small_request(3e-5), s.medium);
  const auto dir = std::filesystem::temp_directory_path() / "mlmc_seis_tests";
  const auto path = dir / "data_roundtrip.csv";
  write_dataset(data, path);
  EXPECT_TRUE(std::filesystem::exists(sidecar_path(path)));
  const auto back = read_dataset(path);
  EXPECT_EQ(back.metadata, data.metadata);
  EXPECT_EQ(back.sigma, data.sigma);
  EXPECT_EQ(back.rate, data.rate);
  ASSERT_EQ(back.traces.size(), data.traces.size());
  for (std::size_t r = 0; r < data.traces.size(); ++r) {
    EXPECT_EQ(back.traces[r].ux, data.traces[r].ux);
    EXPECT_EQ(back.traces[r].uz, data.traces[r].uz);
    EXPECT_EQ(back.traces[r].grid.count, data.traces[r].grid.count);
  }
}

TEST(DataFile, MissingFileIsAConfigError) {
  EXPECT_THROW(read_dataset("/nonexistent/data.csv"), ConfigError);
}
