#include "rdnet/dataset/generate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rdnet/common/errors.hpp"

namespace rdnet::dataset {

namespace {

// Substream tag for the split shuffle; scene streams use their scene id.
constexpr std::uint64_t kSplitStream = ~std::uint64_t{0};

}  // namespace

std::vector<double> even_snr_levels(double lo_db, double hi_db, std::size_t count) {
  if (count == 0) throw DomainError("even_snr_levels: count must be >= 1");
  if (count == 1) return {lo_db};
  std::vector<double> levels(count);
  const double step = (hi_db - lo_db) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) levels[i] = lo_db + step * static_cast<double>(i);
  levels.back() = hi_db;
  return levels;
}

void SplitFractions::validate() const {
  if (train < 0.0 || val < 0.0 || test < 0.0) {
    throw DomainError("split fractions must be non-negative");
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) {
    throw DomainError("split fractions must sum to 1");
  }
}

void DatasetParams::validate() const {
  radar.validate();
  grid.validate();
  split.validate();
  if (grid.n_rows != radar.n_subcarriers || grid.n_cols != radar.n_symbols) {
    throw DomainError("grid map dimensions must equal the radar N x M");
  }
  if (clean_count == 0) throw DomainError("clean_count must be >= 1");
  if (snr_levels.empty()) throw DomainError("at least one SNR level is required");
  for (double s : snr_levels) {
    if (std::isnan(s) || (std::isinf(s) && s < 0)) throw DomainError("invalid SNR level");
  }
}

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

const std::vector<std::uint64_t>& SplitAssignment::of(Split s) const {
  switch (s) {
    case Split::train: return train;
    case Split::val: return val;
    case Split::test: return test;
  }
  return train;
}

SplitAssignment assign_splits(std::size_t clean_count, const SplitFractions& f,
                              std::uint64_t seed) {
  f.validate();
  std::vector<std::uint64_t> ids(clean_count);
  std::iota(ids.begin(), ids.end(), std::uint64_t{0});
  Rng rng = Rng::substream(seed, kSplitStream);
  std::shuffle(ids.begin(), ids.end(), rng.engine());

  const auto n = static_cast<double>(clean_count);
  const auto n_train = std::min<std::size_t>(clean_count, std::llround(n * f.train));
  const auto n_val = std::min<std::size_t>(clean_count - n_train, std::llround(n * f.val));

  SplitAssignment out;
  out.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                 ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), ids.end());
  for (auto* v : {&out.train, &out.val, &out.test}) std::sort(v->begin(), v->end());
  return out;
}

std::vector<DatasetRecord> make_scene_records(const DatasetParams& params,
                                              std::uint64_t scene_id) {
  Rng scene_rng = Rng::substream(params.seed, scene_id, 0);
  const sim::TargetScene scene =
      sample_scene(scene_rng, params.grid, params.n_targets, params.sampling);
  const RdMap gt = build_gt_map(scene, params.grid, params.label);
  const sim::ChannelEstimate clean = sim::synthesize_channel(scene, params.radar);

  std::vector<DatasetRecord> records;
  records.reserve(params.snr_levels.size());
  for (std::size_t j = 0; j < params.snr_levels.size(); ++j) {
    const double snr = params.snr_levels[j];
    Rng noise_rng = Rng::substream(params.seed, scene_id, j + 1);
    DatasetRecord r;
    r.channel = params.qam_path
                    ? sim::qam_roundtrip(scene, params.radar, noise_rng, snr, params.qam_order)
                    : sim::add_awgn(clean, snr, noise_rng);
    r.channel.snr_db = snr;
    r.gt = gt;
    r.snr_db = snr;
    r.scene_id = scene_id;
    r.scene = scene;
    records.push_back(std::move(r));
  }
  return records;
}

GenerationSummary generate_dataset(const DatasetParams& params,
                                   const std::filesystem::path& out_dir) {
  params.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  const SplitAssignment splits = assign_splits(params.clean_count, params.split, params.seed);
  GenerationSummary summary;
  for (double s : params.snr_levels) summary.records_per_snr[s] = 0;

  for (Split split : {Split::train, Split::val, Split::test}) {
    DatasetWriter writer(out_dir / (std::string(split_name(split)) + ".rdds"),
                         params.radar.n_subcarriers, params.radar.n_symbols);
    for (std::uint64_t id : splits.of(split)) {
      for (const DatasetRecord& r : make_scene_records(params, id)) {
        writer.write(r);
        ++summary.records_per_snr[r.snr_db];
      }
    }
    writer.finish();
    summary.records_per_split[split] = writer.count();
    summary.total_records += writer.count();
  }

  std::ofstream manifest(out_dir / "manifest.txt", std::ios::trunc);
  manifest << render_manifest(params, summary);
  if (!manifest) throw IoError("cannot write manifest in " + out_dir.string());
  return summary;
}

std::string format_snr(double snr_db) {
  if (std::isinf(snr_db)) return snr_db > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << snr_db;
  return os.str();
}

std::string render_manifest(const DatasetParams& p, const GenerationSummary& s) {
  std::ostringstream os;
  os.precision(17);
  os << "format = RDDS\n"
     << "format.version = " << kContainerVersion << "\n"
     << "seed = " << p.seed << "\n"
     << "radar.N = " << p.radar.n_subcarriers << "\n"
     << "radar.M = " << p.radar.n_symbols << "\n"
     << "radar.delta_f = " << p.radar.delta_f << "\n"
     << "radar.f_c = " << p.radar.f_c << "\n"
     << "radar.n_cp = " << p.radar.n_cp << "\n"
     << "grid.n_f1 = " << p.grid.n_f1 << "\n"
     << "grid.n_f2 = " << p.grid.n_f2 << "\n"
     << "scene.n_targets = " << p.n_targets << "\n"
     << "scene.amp_offset = " << p.sampling.amp_offset << "\n"
     << "scene.min_sep_f1 = " << p.sampling.min_sep_f1 << "\n"
     << "scene.min_sep_f2 = " << p.sampling.min_sep_f2 << "\n"
     << "scene.random_phase = " << (p.sampling.random_phase ? "true" : "false") << "\n"
     << "label.beta = " << p.label.beta << "\n"
     << "label.gamma = " << p.label.gamma << "\n"
     << "noise.path = " << (p.qam_path ? "qam" : "awgn") << "\n"
     << "clean_count = " << p.clean_count << "\n"
     << "snr.placement = listed (default: evenly spaced over [-15, 30] dB)\n"
     << "snr.levels =";
  for (double v : p.snr_levels) os << ' ' << format_snr(v);
  os << "\n";
  os << "split.fractions = " << p.split.train << ' ' << p.split.val << ' ' << p.split.test
     << "\n";
  for (const auto& [split, n] : s.records_per_split) {
    os << "records." << split_name(split) << " = " << n << "\n";
  }
  os << "records.total = " << s.total_records << "\n";
  for (const auto& [snr, n] : s.records_per_snr) {
    os << "records.snr[" << format_snr(snr) << "] = " << n << "\n";
  }
  return os.str();
}

}  // namespace rdnet::dataset
