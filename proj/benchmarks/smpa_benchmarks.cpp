#include <random>

#include <benchmark/benchmark.h>

#include "smpa/bank.hpp"
#include "smpa/crypto.hpp"
#include "smpa/measurement.hpp"
#include "smpa/reporting.hpp"

using namespace smpa;

namespace {

const ContentBank& bank() {
  static const auto b = ContentBank::load_file(SMPA_SAMPLE_BANK);
  return b;
}

// Four processes, `per_role` participants per (process, role), all answered.
Assessment populated(int per_role) {
  const auto& b = bank();
  const std::vector<std::string> procs = {"SLM", "CHG", "PRB", "CFG"};
  auto a = create_assessment(b, "bench", "", procs, CapabilityLevel::CL5, "2024-01-01T00:00:00Z");
  for (const auto& p : procs) {
    for (auto role : kAllRoles) {
      for (int i = 0; i < per_role; ++i) {
        register_participant(a, b, p + std::to_string(i), {{p, role}}, sha256_hex(random_token()));
      }
    }
  }
  open_assessment(a, "2024-01-01T00:00:00Z");
  std::mt19937_64 rng(1);
  for (const auto& p : a.participants) {
    for (const auto& q : allocate_questionnaire(a, b, p.id)) {
      submit_response(a, b, p.id, q.process, q.question->id, kAllAnswers[rng() % 5],
                      "2024-01-01T00:00:00Z");
    }
  }
  close_assessment(a, "2024-01-01T00:00:00Z");
  return a;
}

void BM_CapabilityLadderAllVectors(benchmark::State& state) {
  std::array<Rating, kAttributeCount> r{};
  for (auto _ : state) {
    int sum = 0;
    for (std::uint32_t v = 0; v < 262144; ++v) {
      std::uint32_t x = v;
      for (std::size_t i = 0; i < kAttributeCount; ++i, x >>= 2) {
        r[i] = static_cast<RatingBand>(x & 3u);
      }
      sum += to_int(determine_capability_level(r));
    }
    benchmark::DoNotOptimize(sum);
  }
}
BENCHMARK(BM_CapabilityLadderAllVectors)->Unit(benchmark::kMillisecond);

void BM_BankLoad(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(ContentBank::load_file(SMPA_SAMPLE_BANK));
  }
}
BENCHMARK(BM_BankLoad)->Unit(benchmark::kMillisecond);

void BM_Measure(benchmark::State& state) {
  const auto a = populated(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(measure(a, bank()));
  }
  state.counters["responses"] = static_cast<double>(a.responses.size());
}
BENCHMARK(BM_Measure)->Arg(1)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_ComposeAndRender(benchmark::State& state) {
  const auto a = populated(5);
  const auto results = measure(a, bank());
  for (auto _ : state) {
    const auto report = compose_report(a, results, bank());
    benchmark::DoNotOptimize(render_report(report, ReportFormat::Structured));
    benchmark::DoNotOptimize(render_report(report, ReportFormat::Html));
  }
}
BENCHMARK(BM_ComposeAndRender)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
