#include "rdnet/dataset/labels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rdnet/common/errors.hpp"

namespace rdnet::dataset {

namespace {

constexpr double kOnGridTol = 1e-9;

std::optional<std::size_t> grid_index(double f, std::size_t n) {
  const double pos = (f + 0.5) * static_cast<double>(n);
  const double rounded = std::round(pos);
  if (std::abs(pos - rounded) > kOnGridTol * static_cast<double>(n)) return std::nullopt;
  if (rounded < 0.0 || rounded >= static_cast<double>(n)) return std::nullopt;
  return static_cast<std::size_t>(rounded);
}

}  // namespace

double GridSpec::f1(std::size_t i) const {
  return -0.5 + static_cast<double>(i) / static_cast<double>(n_f1);
}

double GridSpec::f2(std::size_t j) const {
  return -0.5 + static_cast<double>(j) / static_cast<double>(n_f2);
}

std::optional<std::size_t> GridSpec::index_f1(double f) const { return grid_index(f, n_f1); }
std::optional<std::size_t> GridSpec::index_f2(double f) const { return grid_index(f, n_f2); }

void GridSpec::validate() const {
  if (n_f1 < 1 || n_f2 < 1) throw DomainError("GridSpec: cardinalities must be >= 1");
  if (n_rows < 1 || n_cols < 1) throw DomainError("GridSpec: map dimensions must be >= 1");
}

sim::TargetScene sample_scene(Rng& rng, const GridSpec& grid, std::size_t n_targets,
                              const SamplingRule& rule) {
  grid.validate();
  sim::TargetScene scene;
  scene.phi = rule.random_phase ? rng.uniform(0.0, 2.0 * std::numbers::pi) : 0.0;
  scene.targets.reserve(n_targets);

  constexpr double kSepTol = 1e-12;
  for (std::size_t p = 0; p < n_targets; ++p) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < rule.max_attempts && !placed; ++attempt) {
      const double f1 = grid.f1(rng.index(grid.n_f1));
      const double f2 = grid.f2(rng.index(grid.n_f2));
      placed = true;
      for (const sim::Target& other : scene.targets) {
        if (sim::frequency_distance(f1, other.f1) < rule.min_sep_f1 - kSepTol ||
            sim::frequency_distance(f2, other.f2) < rule.min_sep_f2 - kSepTol) {
          placed = false;
          break;
        }
      }
      if (placed) scene.targets.push_back({0.0, f1, f2});
    }
    if (!placed) {
      throw PlacementError("sample_scene: could not place target " + std::to_string(p + 1) +
                           " of " + std::to_string(n_targets) + " after " +
                           std::to_string(rule.max_attempts) + " attempts");
    }
  }
  // Amplitudes are drawn after placement so the amplitude sequence does not
  // depend on how many placement retries happened.
  for (sim::Target& t : scene.targets) t.b = std::abs(rule.amp_offset + rng.normal());
  return scene;
}

double LabelParams::value(double b) const { return beta * std::log(gamma * b + 1.0); }

double LabelParams::amplitude(double label) const {
  return (std::exp(label / beta) - 1.0) / gamma;
}

std::vector<Cell> target_cells(const sim::TargetScene& scene, const GridSpec& grid) {
  grid.validate();
  std::vector<Cell> cells;
  cells.reserve(scene.targets.size());
  for (const sim::Target& t : scene.targets) {
    const auto i = grid.index_f1(t.f1);
    const auto j = grid.index_f2(t.f2);
    if (!i || !j) {
      throw DomainError("target frequency (" + std::to_string(t.f1) + ", " +
                        std::to_string(t.f2) + ") is not on the label grid");
    }
    cells.push_back({grid.row_of(*i), grid.col_of(*j)});
  }
  return cells;
}

RdMap build_gt_map(const sim::TargetScene& scene, const GridSpec& grid, const LabelParams& label) {
  const auto cells = target_cells(scene, grid);
  RdMap map{Plane::Zero(static_cast<Eigen::Index>(grid.n_rows),
                        static_cast<Eigen::Index>(grid.n_cols))};
  for (std::size_t p = 0; p < cells.size(); ++p) {
    double& cell = map.values(static_cast<Eigen::Index>(cells[p].k),
                              static_cast<Eigen::Index>(cells[p].l));
    cell = std::max(cell, label.value(scene.targets[p].b));
  }
  return map;
}

}  // namespace rdnet::dataset
