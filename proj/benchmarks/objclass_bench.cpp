#include <benchmark/benchmark.h>

#include <spdlog/spdlog.h>

#include "objclass/kernels.hpp"
#include "objclass/segmentation.hpp"
#include "objclass/svm.hpp"
#include "objclass/svrf.hpp"
#include "objclass/synth.hpp"

using namespace objclass;

namespace {

const SyntheticScene& scene() {
  static const SyntheticScene s = [] {
    spdlog::set_level(spdlog::level::warn);
    return generate_scene(standard_scene_spec(7));
  }();
  return s;
}

const KernelSpec kSpec{BaseKernel{KernelFamily::Rbf, 0.1}, BaseKernel{KernelFamily::Rbf, 0.1}, 0.5};

std::vector<PixelFeatures> sample_points(std::size_t n) {
  const auto& s = scene();
  std::vector<PixelFeatures> pts;
  const std::size_t stride = s.raster.pixel_count() / n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = s.raster.spectrum(i * stride);
    pts.push_back({x, x});
  }
  return pts;
}

void BM_Gram(benchmark::State& state) {
  const auto pts = sample_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gram(kSpec, pts));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Gram)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oNSquared);

void BM_SmoTrain(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pts = sample_points(n);
  const auto& s = scene();
  const std::size_t stride = s.raster.pixel_count() / n;
  std::vector<int> y;
  for (std::size_t i = 0; i < n; ++i) y.push_back(s.truth[i * stride] == 1 ? 1 : -1);
  for (auto _ : state) benchmark::DoNotOptimize(smo_train(pts, y, kSpec, SmoParams{10.0, 1e-3}));
}
BENCHMARK(BM_SmoTrain)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_Segment(benchmark::State& state) {
  const auto& r = scene().raster;
  const double t = default_segment_threshold(r);
  for (auto _ : state) benchmark::DoNotOptimize(segment(r, t, 8));
}
BENCHMARK(BM_Segment)->Unit(benchmark::kMillisecond);

void BM_Icm(benchmark::State& state) {
  const auto& s = scene();
  const auto seg = segment(s.raster, default_segment_threshold(s.raster), 8);
  const Raster spatial = spatial_feature_map(s.raster, seg);
  const auto mask = draw_training_mask(s.truth, 50, 1);
  std::vector<PixelFeatures> pts;
  std::vector<ClassId> labels;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 0) continue;
    pts.push_back({s.raster.spectrum(i), spatial.spectrum(i)});
    labels.push_back(mask[i]);
  }
  const auto model = train_multiclass(pts, labels, kSpec, SmoParams{10.0, 1e-3});
  const UnaryField u = unary_field(model, s.raster, spatial);
  const SvrfParams params{1.0, estimate_sigma_s(s.raster)};
  for (auto _ : state) benchmark::DoNotOptimize(icm_infer(params, u, s.raster));
}
BENCHMARK(BM_Icm)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
