#include "rdnet/cli/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rdnet/common/errors.hpp"
#include "rdnet/common/key_value.hpp"

namespace rdnet::cli {

namespace {

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::istringstream is(value);
  std::string item;
  while (std::getline(is, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) throw DomainError(key + ": empty list");
  return out;
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

}  // namespace

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  data.seed = s;
  model.seed = s;
  train.seed = s;
}

void RunConfig::apply(const std::string& key, const std::string& value) {
  auto& radar = data.radar;
  if (key == "seed") {
    set_seed(parse_u64(key, value));
  } else if (key == "verbosity") {
    verbosity = static_cast<int>(parse_u64(key, value));
  } else if (key == "paths.dataset") {
    dataset_dir = value;
  } else if (key == "paths.checkpoint") {
    checkpoint = value;
  } else if (key == "paths.out") {
    out_dir = value;
  } else if (key == "radar.n_subcarriers") {
    radar.n_subcarriers = parse_size(key, value);
  } else if (key == "radar.n_symbols") {
    radar.n_symbols = parse_size(key, value);
  } else if (key == "radar.delta_f") {
    radar.delta_f = parse_double(key, value);
  } else if (key == "radar.f_c") {
    radar.f_c = parse_double(key, value);
  } else if (key == "radar.n_cp") {
    radar.n_cp = parse_size(key, value);
  } else if (key == "data.clean_count") {
    data.clean_count = parse_size(key, value);
  } else if (key == "data.n_targets") {
    data.n_targets = parse_size(key, value);
  } else if (key == "data.snr_levels") {
    data.snr_levels = parse_list(key, value);
  } else if (key == "data.snr_count" || key == "data.snr_min" || key == "data.snr_max") {
    // Evenly spaced levels; the other two bounds come from the current list.
    const auto& cur = data.snr_levels;
    double lo = cur.empty() ? -15.0 : cur.front();
    double hi = cur.empty() ? 30.0 : cur.back();
    std::size_t count = cur.size();
    if (key == "data.snr_count") count = parse_size(key, value);
    if (key == "data.snr_min") lo = parse_double(key, value);
    if (key == "data.snr_max") hi = parse_double(key, value);
    data.snr_levels = dataset::even_snr_levels(lo, hi, count);
  } else if (key == "data.split_train") {
    data.split.train = parse_double(key, value);
  } else if (key == "data.split_val") {
    data.split.val = parse_double(key, value);
  } else if (key == "data.split_test") {
    data.split.test = parse_double(key, value);
  } else if (key == "data.amp_offset") {
    data.sampling.amp_offset = parse_double(key, value);
  } else if (key == "data.random_phase") {
    data.sampling.random_phase = parse_bool(key, value);
  } else if (key == "data.noise_path") {
    if (value != "awgn" && value != "qam") throw DomainError(key + ": expected awgn or qam");
    data.qam_path = value == "qam";
  } else if (key == "data.qam_order") {
    data.qam_order = parse_size(key, value);
  } else if (key == "data.seed") {
    data.seed = parse_u64(key, value);
  } else if (starts_with(key, "model.")) {
    if (!model::apply_model_key(model, key.substr(6), value)) {
      throw DomainError("unknown config key '" + key + "'");
    }
  } else if (starts_with(key, "train.")) {
    if (!model::apply_train_key(train, key.substr(6), value)) {
      throw DomainError("unknown config key '" + key + "'");
    }
  } else {
    throw DomainError("unknown config key '" + key + "'");
  }
}

void RunConfig::apply_text(const std::string& text) {
  for (const auto& [key, value] : parse_key_values(text)) apply(key, value);
}

void RunConfig::finalize() {
  data.radar.validate();
  const double amp_offset = data.sampling.amp_offset;
  const bool random_phase = data.sampling.random_phase;
  data.grid = dataset::GridSpec::for_radar(data.radar);
  data.sampling = dataset::SamplingRule::for_radar(data.radar);
  data.sampling.amp_offset = amp_offset;
  data.sampling.random_phase = random_phase;
  data.validate();
  model.n_rows = data.radar.n_subcarriers;
  model.n_cols = data.radar.n_symbols;
  model.validate();
  train.validate();
}

std::string RunConfig::render() const {
  std::ostringstream os;
  os << "# rdnet " << kVersion << '\n'
     << "seed=" << seed << '\n'
     << "verbosity=" << verbosity << '\n'
     << "[paths]\n"
     << "dataset=" << dataset_dir.string() << '\n'
     << "checkpoint=" << checkpoint.string() << '\n'
     << "out=" << out_dir.string() << '\n'
     << "[radar]\n"
     << "n_subcarriers=" << data.radar.n_subcarriers << '\n'
     << "n_symbols=" << data.radar.n_symbols << '\n'
     << "delta_f=" << format_double(data.radar.delta_f) << '\n'
     << "f_c=" << format_double(data.radar.f_c) << '\n'
     << "n_cp=" << data.radar.n_cp << '\n'
     << "[data]\n"
     << "seed=" << data.seed << '\n'
     << "clean_count=" << data.clean_count << '\n'
     << "n_targets=" << data.n_targets << '\n'
     << "snr_levels=";
  for (std::size_t i = 0; i < data.snr_levels.size(); ++i) {
    os << (i ? "," : "") << format_double(data.snr_levels[i]);
  }
  os << '\n'
     << "split_train=" << format_double(data.split.train) << '\n'
     << "split_val=" << format_double(data.split.val) << '\n'
     << "split_test=" << format_double(data.split.test) << '\n'
     << "amp_offset=" << format_double(data.sampling.amp_offset) << '\n'
     << "random_phase=" << (data.sampling.random_phase ? "true" : "false") << '\n'
     << "noise_path=" << (data.qam_path ? "qam" : "awgn") << '\n'
     << "qam_order=" << data.qam_order << '\n'
     << "[model]\n"
     << model.to_text() << "[train]\n"
     << "lr=" << format_double(train.lr) << '\n'
     << "batch_size=" << train.batch_size << '\n'
     << "max_epochs=" << train.max_epochs << '\n'
     << "patience=" << train.patience << '\n'
     << "seed=" << train.seed << '\n'
     << "max_seconds=" << format_double(train.max_seconds) << '\n';
  return os.str();
}

std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv("RDNET_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  return parse_u64("RDNET_SEED", v);
}

RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides) {
  RunConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    cfg.apply_text(text.str());
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw DomainError("override '" + o + "' is not key=value");
    }
    cfg.apply(trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
  }
  if (const auto s = seed_from_env()) cfg.set_seed(*s);
  cfg.finalize();
  return cfg;
}

}  // namespace rdnet::cli
