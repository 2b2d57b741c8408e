#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "rdnet/common/errors.hpp"
#include "rdnet/dataset/container.hpp"
#include "rdnet/dataset/generate.hpp"
#include "rdnet/dataset/labels.hpp"
#include "test_util.hpp"

using namespace rdnet;
using namespace rdnet::dataset;

namespace {

double wrap_dist(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 1.0 - d);
}

DatasetParams tiny_params() {
  DatasetParams p;
  p.clean_count = 10;
  p.snr_levels = {-15.0, 30.0};
  p.seed = 42;
  return p;
}

}  // namespace

TEST_CASE("grid points and indices") {
  const GridSpec g;
  CHECK(g.f1(0) == -0.5);
  CHECK(g.f1(32) == 0.0);
  CHECK(g.f2(4) == 0.0);
  CHECK(g.index_f1(g.f1(17)) == 17u);
  CHECK_FALSE(g.index_f1(g.f1(17) + 0.003).has_value());
  CHECK(g.row_of(5) == 5u);
}

TEST_CASE("single-target scenes") {
  const GridSpec g;
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto s = sample_scene(rng, g, 1);
    REQUIRE(s.targets.size() == 1);
    CHECK(s.targets[0].b >= 0.0);
    CHECK(g.index_f1(s.targets[0].f1).has_value());
    CHECK(g.index_f2(s.targets[0].f2).has_value());
    CHECK(s.phi == 0.0);
  }
}

TEST_CASE("five-target scenes respect the minimum separation") {
  const GridSpec g;
  const SamplingRule rule;
  Rng rng(2);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto s = sample_scene(rng, g, 5, rule);
    REQUIRE(s.targets.size() == 5);
    for (std::size_t a = 0; a < 5; ++a) {
      for (std::size_t b = a + 1; b < 5; ++b) {
        REQUIRE(wrap_dist(s.targets[a].f1, s.targets[b].f1) >= 1.0 / (3.0 * 64.0) - 1e-12);
        REQUIRE(wrap_dist(s.targets[a].f2, s.targets[b].f2) >= 1.0 / (3.0 * 8.0) - 1e-12);
      }
    }
  }
}

TEST_CASE("more targets than distinct columns cannot be placed") {
  const GridSpec g;
  Rng rng(3);
  SamplingRule rule;
  rule.max_attempts = 50;
  CHECK_THROWS_AS(sample_scene(rng, g, 9, rule), PlacementError);
}

TEST_CASE("amplitude mean matches the folded normal") {
  // E|mu + r| for r ~ N(0, 1): sqrt(2/pi) exp(-mu^2/2) + mu (1 - 2 Phi(-mu)).
  const double mu = 0.1;
  const double phi_neg = 0.5 * std::erfc(mu / std::numbers::sqrt2);
  const double expected =
      std::sqrt(2.0 / std::numbers::pi) * std::exp(-mu * mu / 2.0) + mu * (1.0 - 2.0 * phi_neg);
  const GridSpec g;
  Rng rng(4);
  double sum = 0.0;
  std::size_t n = 0;
  while (n < 1000000) {
    for (const auto& t : sample_scene(rng, g, 5).targets) {
      sum += t.b;
      ++n;
    }
  }
  // Standard error is about 6e-4 for 1e6 draws.
  CHECK(std::abs(sum / static_cast<double>(n) - expected) < 3e-3);
}

TEST_CASE("label transform") {
  const LabelParams label;
  CHECK(label.value(0.1) == doctest::Approx(100.0 * std::log(11.0)).epsilon(1e-12));
  CHECK(std::abs(label.value(0.1) - 239.7895272798371) < 1e-9);
  CHECK(label.value(0.0) == 0.0);
  CHECK(label.amplitude(label.value(0.37)) == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("ground-truth maps") {
  const GridSpec g;
  const auto empty = build_gt_map(sim::TargetScene{}, g);
  CHECK(empty.rows() == 64);
  CHECK(empty.cols() == 8);
  CHECK(empty.values.isZero(0.0));

  sim::TargetScene two;
  two.targets = {{0.5, g.f1(3), g.f2(1)}, {1.5, g.f1(40), g.f2(6)}};
  const auto map = build_gt_map(two, g);
  CHECK((map.values.array() != 0.0).count() == 2);
  const LabelParams label;
  CHECK(map.values(3, 1) == doctest::Approx(label.value(0.5)));
  CHECK(map.values(40, 6) == doctest::Approx(label.value(1.5)));

  const auto cells = target_cells(two, g);
  CHECK(cells == std::vector<Cell>{{3, 1}, {40, 6}});

  sim::TargetScene off;
  off.targets = {{1.0, g.f1(3) + 0.004, 0.0}};
  CHECK_THROWS_AS(build_gt_map(off, g), DomainError);
}

TEST_CASE("container round trip is bit-identical") {
  test::TempDir dir;
  const auto params = tiny_params();
  auto records = make_scene_records(params, 0);
  auto more = make_scene_records(params, 1);
  records.insert(records.end(), more.begin(), more.end());
  write_dataset(dir / "a.rdds", records);
  const auto back = read_dataset(dir / "a.rdds");
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    // Planes are stored as 32-bit floats.
    CHECK(back[i].channel.i_plane == records[i].channel.i_plane.cast<float>().cast<double>());
    CHECK(back[i].gt.values == records[i].gt.values.cast<float>().cast<double>());
    CHECK(back[i].snr_db == records[i].snr_db);
    CHECK(back[i].scene_id == records[i].scene_id);
    CHECK(back[i].scene.targets.size() == records[i].scene.targets.size());
    CHECK(back[i].scene.targets[2].f1 == records[i].scene.targets[2].f1);
  }
  write_dataset(dir / "b.rdds", back);
  CHECK(test::file_bytes(dir / "a.rdds") == test::file_bytes(dir / "b.rdds"));

  DatasetReader reader(dir / "a.rdds");
  std::uint64_t streamed = 0;
  while (reader.next()) ++streamed;
  CHECK(streamed == reader.header().record_count);
  CHECK(streamed == records.size());
}

TEST_CASE("container format errors") {
  test::TempDir dir;
  const auto params = tiny_params();
  const auto records = make_scene_records(params, 0);
  write_dataset(dir / "ok.rdds", records);
  const std::string bytes = test::file_bytes(dir / "ok.rdds");

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  test::write_bytes(dir / "magic.rdds", bad_magic);
  CHECK_THROWS_AS(read_dataset(dir / "magic.rdds"), FormatError);

  test::write_bytes(dir / "short.rdds", bytes.substr(0, bytes.size() - 7));
  CHECK_THROWS_AS(read_dataset(dir / "short.rdds"), FormatError);

  test::write_bytes(dir / "long.rdds", bytes + "zz");
  CHECK_THROWS_AS(read_dataset(dir / "long.rdds"), FormatError);

  std::string bad_version = bytes;
  bad_version[4] = 9;
  test::write_bytes(dir / "version.rdds", bad_version);
  CHECK_THROWS_AS(read_dataset(dir / "version.rdds"), FormatError);

  CHECK_THROWS_AS(read_dataset(dir / "missing.rdds"), IoError);
}

TEST_CASE("snr level spacing") {
  const auto levels = even_snr_levels(-15.0, 30.0, 10);
  REQUIRE(levels.size() == 10);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    CHECK(levels[i] == doctest::Approx(-15.0 + 5.0 * static_cast<double>(i)));
  }
  CHECK(even_snr_levels(-15.0, 30.0, 2) == std::vector<double>{-15.0, 30.0});
}

TEST_CASE("single noise-free record equals the clean synthesis") {
  DatasetParams p;
  p.clean_count = 1;
  p.snr_levels = {sim::kNoiseFree};
  const auto recs = make_scene_records(p, 0);
  REQUIRE(recs.size() == 1);
  const auto clean = sim::synthesize_channel(recs[0].scene, p.radar);
  CHECK(recs[0].channel.i_plane == clean.i_plane);
  CHECK(recs[0].channel.q_plane == clean.q_plane);
  CHECK(std::isinf(recs[0].snr_db));
}

TEST_CASE("generation layout, splits and determinism") {
  test::TempDir a, b;
  const auto params = tiny_params();
  const auto summary = generate_dataset(params, a.path());
  CHECK(summary.total_records == 20);
  CHECK(summary.records_per_snr.at(-15.0) == 10);
  CHECK(summary.records_per_snr.at(30.0) == 10);
  CHECK(summary.records_per_split.at(Split::train) == 16);
  CHECK(summary.records_per_split.at(Split::val) == 2);
  CHECK(summary.records_per_split.at(Split::test) == 2);

  // Scenes never straddle splits.
  std::set<std::uint64_t> seen;
  for (const char* name : {"train", "val", "test"}) {
    std::set<std::uint64_t> ids;
    for (const auto& r : read_dataset(a / (std::string(name) + ".rdds"))) ids.insert(r.scene_id);
    for (auto id : ids) CHECK(seen.insert(id).second);
  }
  CHECK(seen.size() == 10);

  generate_dataset(params, b.path());
  for (const char* f : {"train.rdds", "val.rdds", "test.rdds", "manifest.txt"}) {
    CHECK(test::file_bytes(a / f) == test::file_bytes(b / f));
  }
}

TEST_CASE("dataset parameter validation") {
  DatasetParams p;
  p.clean_count = 0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  DatasetParams q;
  q.split = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(q.validate(), DomainError);
  DatasetParams r;
  r.snr_levels.clear();
  CHECK_THROWS_AS(r.validate(), DomainError);
}
