#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "spingate/model.hpp"
#include "spingate/objective.hpp"
#include "spingate/propagation.hpp"

namespace spingate {

enum class PerturbationTarget { Couplings, Frequencies };

std::string_view to_string(PerturbationTarget t);
PerturbationTarget perturbation_from_string(std::string_view name);

// Each nonzero coupling (or every frequency) is redrawn from N(nominal, sigma)
// with sigma = nominal * relative_sigma. Defaults: 1/8 for couplings, 1/25 for
// frequencies.
struct EnsembleSpec {
  PerturbationTarget target = PerturbationTarget::Couplings;
  std::optional<double> relative_sigma;  // unset: the target's default
  int size = 10000;
  std::uint64_t seed = 1;
  int threads = 0;
  int histogram_bins = 0;  // 0: Freedman-Diaconis

  double sigma_fraction() const;
  void validate() const;
  bool operator==(const EnsembleSpec &) const = default;
};

inline constexpr double kCouplingSigmaFraction = 1.0 / 8.0;
inline constexpr double kFrequencySigmaFraction = 1.0 / 25.0;

// Independent stream seed for ensemble member `index`.
std::uint64_t sample_seed(std::uint64_t master, std::uint64_t index);

struct SampledSystem {
  SpinSystem system;
  int redraws = 0;  // negative coupling draws that were rejected
};

// Perturbs the targeted parameters of `nominal` with an engine seeded by
// `seed`. Couplings are drawn once per unordered pair; negative draws are
// rejected and redrawn.
SampledSystem sample_system(const SpinSystem &nominal, const EnsembleSpec &spec,
                            std::uint64_t seed);

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<long> counts;
};

// Freedman-Diaconis bin count when bins <= 0 (a single bin for zero spread).
Histogram make_histogram(const std::vector<double> &values, int bins = 0);
void write_histogram_csv(const std::filesystem::path &path, const Histogram &h);

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // population form, 1/L normalisation
};

Summary summarize(const std::vector<double> &values);

struct EnsembleReport {
  EnsembleSpec spec;
  double nominal_fidelity = 0.0;
  double nominal_entropy = 0.0;
  Summary fidelity;
  Summary entropy;
  Histogram fidelity_histogram;
  Histogram entropy_histogram;
  std::vector<double> fidelities;
  std::vector<double> entropies;
  long redraws = 0;
  double wall_seconds = 0.0;
};

// Applies one fixed field to every ensemble member and collects F and
// S_vN(t_f) for the reference initial state. A failing member aborts the run
// with a NumericalError naming its index and seed.
EnsembleReport evaluate_ensemble(const SpinSystem &nominal, const ControlField &field,
                                 const TimeGrid &grid, const GateTarget &gate,
                                 const EnsembleSpec &spec);

}  // namespace spingate
