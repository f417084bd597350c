#include "spingate/robustness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

#include "spingate/diagnostics.hpp"
#include "spingate/parallel.hpp"

namespace spingate {

std::string_view to_string(PerturbationTarget t) {
  return t == PerturbationTarget::Couplings ? "couplings" : "frequencies";
}

PerturbationTarget perturbation_from_string(std::string_view name) {
  if (name == "couplings") return PerturbationTarget::Couplings;
  if (name == "frequencies") return PerturbationTarget::Frequencies;
  throw std::invalid_argument("unknown perturbation target '" + std::string(name) + "'");
}

double EnsembleSpec::sigma_fraction() const {
  if (relative_sigma) return *relative_sigma;
  return target == PerturbationTarget::Couplings ? kCouplingSigmaFraction : kFrequencySigmaFraction;
}

void EnsembleSpec::validate() const {
  if (size < 1) throw std::invalid_argument("ensemble size must be >= 1");
  if (relative_sigma && !(*relative_sigma >= 0.0))
    throw std::invalid_argument("relative sigma must be >= 0");
  if (histogram_bins < 0) throw std::invalid_argument("histogram bins must be >= 0");
}

std::uint64_t sample_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 on a counter offset by the master seed
  std::uint64_t z = master + (index + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SampledSystem sample_system(const SpinSystem &nominal, const EnsembleSpec &spec,
                            std::uint64_t seed) {
  nominal.validate();
  spec.validate();
  SampledSystem out{nominal, 0};
  std::mt19937_64 rng(seed);
  const double fraction = spec.sigma_fraction();
  std::normal_distribution<double> unit(0.0, 1.0);

  if (spec.target == PerturbationTarget::Frequencies) {
    for (double &w : out.system.frequencies) w += fraction * std::abs(w) * unit(rng);
    return out;
  }
  const int n = nominal.particles();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double g = nominal.couplings(i, j);
      if (g == 0.0) continue;
      double draw = g + fraction * g * unit(rng);
      while (draw < 0.0) {
        ++out.redraws;
        draw = g + fraction * g * unit(rng);
      }
      out.system.couplings(i, j) = draw;
      out.system.couplings(j, i) = draw;
    }
  return out;
}

Histogram make_histogram(const std::vector<double> &values, int bins) {
  if (values.empty()) throw std::invalid_argument("histogram of an empty sample");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front(), hi = sorted.back();
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return i + 1 < sorted.size() ? sorted[i] * (1.0 - frac) + sorted[i + 1] * frac : sorted[i];
  };
  if (bins <= 0) {
    const double iqr = quantile(0.75) - quantile(0.25);
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
    bins = (width > 0.0 && hi > lo)
               ? static_cast<int>(std::min(1e4, std::ceil((hi - lo) / width)))
               : 1;
    bins = std::max(bins, 1);
  }
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  const double width = (hi - lo) / bins;
  for (int b = 0; b <= bins; ++b) h.edges.push_back(b == bins ? hi : lo + b * width);
  for (double x : values) {
    int b = width > 0.0 ? static_cast<int>((x - lo) / width) : 0;
    h.counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))] += 1;
  }
  return h;
}

void write_histogram_csv(const std::filesystem::path &path, const Histogram &h) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    out << h.edges[b] << ',' << h.edges[b + 1] << ',' << h.counts[b] << '\n';
}

Summary summarize(const std::vector<double> &values) {
  if (values.empty()) throw std::invalid_argument("summary of an empty sample");
  double sum = 0.0;
  for (double x : values) sum += x;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double x : values) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

EnsembleReport evaluate_ensemble(const SpinSystem &nominal, const ControlField &field,
                                 const TimeGrid &grid, const GateTarget &gate,
                                 const EnsembleSpec &spec) {
  spec.validate();
  check_field(field, grid);
  const auto start = std::chrono::steady_clock::now();
  const int m = nominal.qubits, n = nominal.environment;
  if (gate.matrix.rows() != pow2(m)) throw std::invalid_argument("gate does not match the qubits");
  const CVector psi0 = reference_initial_state(m, n);

  auto evaluate = [&](const SpinSystem &system, double &fidelity, double &entropy) {
    const CMatrix u = propagate_final(assemble_hamiltonian(system), field, grid);
    fidelity = distance(u, gate.matrix, m, n).fidelity();
    entropy = von_neumann_entropy(reduced_density(u, psi0, m, n));
  };

  EnsembleReport report;
  report.spec = spec;
  evaluate(nominal, report.nominal_fidelity, report.nominal_entropy);

  const auto size = static_cast<std::size_t>(spec.size);
  report.fidelities.resize(size);
  report.entropies.resize(size);
  std::vector<int> redraws(size, 0);
  parallel_for(size, spec.threads, [&](std::size_t i) {
    const std::uint64_t seed = sample_seed(spec.seed, i);
    try {
      const SampledSystem s = sample_system(nominal, spec, seed);
      redraws[i] = s.redraws;
      evaluate(s.system, report.fidelities[i], report.entropies[i]);
    } catch (const std::exception &e) {
      throw NumericalError("ensemble member " + std::to_string(i) + " (seed " +
                           std::to_string(seed) + ") failed: " + e.what());
    }
  });
  for (int r : redraws) report.redraws += r;

  report.fidelity = summarize(report.fidelities);
  report.entropy = summarize(report.entropies);
  report.fidelity_histogram = make_histogram(report.fidelities, spec.histogram_bins);
  report.entropy_histogram = make_histogram(report.entropies, spec.histogram_bins);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace spingate
