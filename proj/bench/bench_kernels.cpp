// Serial reference vs OpenMP kernels.
#include <filesystem>
#include <random>

#include <benchmark/benchmark.h>

#include "afford/datasets.hpp"
#include "afford/kernels.hpp"

namespace fs = std::filesystem;
using namespace afford;

namespace {

std::vector<FeatureVector> random_features(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<FeatureVector> xs(n);
  for (auto& x : xs) {
    x.values.resize(d);
    for (auto& v : x.values) v = noise(rng);
  }
  return xs;
}

const GaussianAttributeClassifier& texture_classifier() {
  static const GaussianAttributeClassifier clf = [] {
    const auto names = entities_of(AttributeKind::Texture);
    std::vector<LabelledFeature> samples;
    const auto xs = random_features(names.size() * 50, 32, 1);
    for (std::size_t i = 0; i < xs.size(); ++i) samples.push_back({xs[i], make_entity(AttributeKind::Texture, names[i % names.size()])});
    return fit_gaussian(samples, AttributeKind::Texture);
  }();
  return clf;
}

std::vector<Point3> random_points(std::size_t n) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point3> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

struct Fixture {
  Model model;
  std::vector<ObjectRecord> records;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    const auto dir = fs::temp_directory_path() / "afford_bench_data";
    SynthConfig cfg;
    cfg.per_class = 40;
    cfg.points_per_object = 50;
    const auto manifest = synth_generate(cfg, dir);
    RunConfig rc;
    Fixture out{train_model(manifest.records, rc), manifest.records};
    fs::remove_all(dir);
    return out;
  }();
  return f;
}

void BM_PosteriorsSerial(benchmark::State& state) {
  const auto xs = random_features(static_cast<std::size_t>(state.range(0)), 32, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::posteriors(texture_classifier(), xs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PosteriorsParallel(benchmark::State& state) {
  const auto xs = random_features(static_cast<std::size_t>(state.range(0)), 32, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::parallel::posteriors(texture_classifier(), xs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BinCountsSerial(benchmark::State& state) {
  const auto pts = random_points(static_cast<std::size_t>(state.range(0)));
  const auto part = partition_z(PointCloud{pts}, 10);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::bin_counts(pts, part));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BinCountsParallel(benchmark::State& state) {
  const auto pts = random_points(static_cast<std::size_t>(state.range(0)));
  const auto part = partition_z(PointCloud{pts}, 10);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::parallel::bin_counts(pts, part));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_InferSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::infer_batch(f.model, f.records));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.records.size()));
}

void BM_InferParallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::parallel::infer_batch(f.model, f.records));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.records.size()));
}

}  // namespace

BENCHMARK(BM_PosteriorsSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_PosteriorsParallel)->Arg(1000)->Arg(10000);
BENCHMARK(BM_BinCountsSerial)->Arg(100000)->Arg(1000000);
BENCHMARK(BM_BinCountsParallel)->Arg(100000)->Arg(1000000);
BENCHMARK(BM_InferSerial);
BENCHMARK(BM_InferParallel);

BENCHMARK_MAIN();
