#include "walker/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace walker::evolution {

namespace {

using cpg::NeuronId;
using cpg::Side;
using cpg::Unit;

constexpr NeuronId LH_F{Unit::LeftHip, Side::Flexor};
constexpr NeuronId LH_E{Unit::LeftHip, Side::Extensor};
constexpr NeuronId RH_F{Unit::RightHip, Side::Flexor};
constexpr NeuronId RH_E{Unit::RightHip, Side::Extensor};
constexpr NeuronId LK_F{Unit::LeftKnee, Side::Flexor};
constexpr NeuronId LK_E{Unit::LeftKnee, Side::Extensor};

// Canonical cells for the connection genes w1..w8, written source -> target.
// w1..w8 enumerate the rows of the connectivity figure: allowed target rows
// (RH_F, RH_E, LK_F, LK_E) crossed with sources (LH_F, LH_E). w1..w4 couple
// the hip units (both directions exist via mirroring), w5..w8 run one-way
// from a hip unit into the same-side knee unit. Every entry is mirrored
// left<->right when placed. Row-major over targets: any other reading of the
// figure leaves both knee neurons driven on the same side of the half-center,
// which pins the knee units instead of producing their double-rate rhythm.
struct Placement {
  NeuronId source, target;
};
constexpr Placement kPlacements[8] = {
    {LH_F, RH_F},  // w1
    {LH_E, RH_F},  // w2
    {LH_F, RH_E},  // w3
    {LH_E, RH_E},  // w4
    {LH_F, LK_F},  // w5
    {LH_E, LK_F},  // w6
    {LH_F, LK_E},  // w7
    {LH_E, LK_E},  // w8
};

const char* kGeneNames[kNumGenes] = {
    "w",   "u0",  "tau", "tau_prime", "beta",
    "w1",  "w2",  "w3",  "w4",  "w5",  "w6",  "w7",  "w8",
    "w1*", "w2*", "w3*", "w4*", "w5*", "w6*", "w7*", "w8*",
    "a1",  "a2",  "a1*", "a2*",
};

std::uint64_t derive_seed(std::uint64_t run_seed, int generation, int index) {
  // splitmix64 over a combined key
  std::uint64_t x = run_seed ^ (0x9E3779B97F4A7C15ULL * (std::uint64_t(generation) + 1))
                  ^ (0xBF58476D1CE4E5B9ULL * (std::uint64_t(index) + 1));
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

const char* gene_name(int index) { return kGeneNames[index]; }

GeneBounds GeneBounds::defaults() {
  GeneBounds b;
  b.intervals[kW] = {-5.0, 5.0};
  b.intervals[kU0] = {0.0, 2.0};
  b.intervals[kTau] = {0.05, 1.0};
  b.intervals[kTauPrime] = {0.05, 1.0};
  b.intervals[kBeta] = {0.0, 5.0};
  for (int i = 0; i < 8; ++i) {
    b.intervals[kConn0 + i] = {-3.0, 3.0};
    b.intervals[kConnGate0 + i] = {0.0, 1.0};
  }
  b.intervals[kA1] = {0.0, 2.0};
  b.intervals[kA2] = {0.0, 2.0};
  b.intervals[kA1Gate] = {0.0, 1.0};
  b.intervals[kA2Gate] = {0.0, 1.0};
  return b;
}

void GeneBounds::validate_chromosome(const Chromosome& c) const {
  for (int i = 0; i < kNumGenes; ++i) {
    const auto [lo, hi] = intervals[i];
    if (!(c[i] >= lo && c[i] <= hi)) {
      throw ValidationError(std::string("gene ") + kGeneNames[i] + " = " + std::to_string(c[i]) +
                            " outside bounds [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
  }
}

Decoded decode(const Chromosome& c, const GeneBounds& bounds) {
  bounds.validate_chromosome(c);

  Decoded d;
  d.params.w_mutual = c[kW];
  d.params.u0 = c[kU0];
  d.params.tau = c[kTau];
  d.params.tau_prime = c[kTauPrime];
  d.params.beta = c[kBeta];

  for (int i = 0; i < 8; ++i) {
    const double weight = c[kConnGate0 + i] >= 0.5 ? c[kConn0 + i] : 0.0;
    const Placement& p = kPlacements[i];
    d.connectivity.set(p.target, p.source, weight);
    d.connectivity.set(p.target.mirrored(), p.source.mirrored(), weight);
  }
  d.connectivity.validate();

  d.gains.a1 = c[kA1Gate] >= 0.5 ? c[kA1] : 0.0;
  d.gains.a2 = c[kA2Gate] >= 0.5 ? c[kA2] : 0.0;
  return d;
}

coupling::Controller make_controller(const Chromosome& c, const GeneBounds& bounds,
                                     const cpg::InitialStateRule& rule) {
  const Decoded d = decode(c, bounds);
  return {cpg::build_network(d.params, d.connectivity, rule), d.gains};
}

Chromosome random_chromosome(const GeneBounds& bounds, Rng& rng) {
  Chromosome c;
  for (int i = 0; i < kNumGenes; ++i) {
    const auto [lo, hi] = bounds.intervals[i];
    c[i] = std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  return c;
}

std::size_t tournament_select(std::span<const double> fitnesses, std::size_t size, double p,
                              Rng& rng) {
  if (fitnesses.empty()) throw ValidationError("tournament over empty population");
  if (size == 0 || size > fitnesses.size()) {
    throw ValidationError("tournament size must be in [1, population size]");
  }

  std::vector<std::size_t> all(fitnesses.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::size_t> contestants;
  std::sample(all.begin(), all.end(), std::back_inserter(contestants), size, rng);

  // Rank by fitness descending, ties broken by lower index.
  std::sort(contestants.begin(), contestants.end(), [&](std::size_t a, std::size_t b) {
    if (fitnesses[a] != fitnesses[b]) return fitnesses[a] > fitnesses[b];
    return a < b;
  });

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t rank = 0; rank + 1 < contestants.size(); ++rank) {
    if (coin(rng) < p) return contestants[rank];
  }
  return contestants.back();
}

std::pair<Chromosome, Chromosome> two_point_crossover(const Chromosome& p1, const Chromosome& p2,
                                                      double crossover_p, Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) >= crossover_p) return {p1, p2};

  std::uniform_int_distribution<int> cut(1, kNumGenes - 1);
  int i = cut(rng);
  int j = cut(rng);
  while (j == i) j = cut(rng);
  if (i > j) std::swap(i, j);

  Chromosome c1 = p1, c2 = p2;
  for (int k = i; k < j; ++k) std::swap(c1[k], c2[k]);
  return {c1, c2};
}

Chromosome mutate(const Chromosome& c, double mutation_p, const GeneBounds& bounds, Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) >= mutation_p) return c;

  Chromosome out = c;
  const int gene = std::uniform_int_distribution<int>(0, kNumGenes - 1)(rng);
  const auto [lo, hi] = bounds.intervals[gene];
  out[gene] = std::uniform_real_distribution<double>(lo, hi)(rng);
  return out;
}

double fitness_displacement(const coupling::EpisodeResult& result) { return result.displacement; }

void GaConfig::validate() const {
  if (population_size < 1) throw ValidationError("population_size must be >= 1");
  if (tournament_size < 1 || tournament_size > population_size) {
    throw ValidationError("tournament_size must be in [1, population_size]");
  }
  for (double p : {tournament_p, crossover_p, mutation_p}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("probabilities must be in [0, 1]");
  }
  if (generations < 1) throw ValidationError("generations must be >= 1");
  for (int i = 0; i < kNumGenes; ++i) {
    const auto [lo, hi] = bounds.intervals[i];
    if (!(lo <= hi)) throw ValidationError(std::string("bounds for gene ") + kGeneNames[i] + " inverted");
  }
}

namespace {

// Index-addressed parallel map; results are identical for any thread count.
void evaluate_population(const std::vector<Chromosome>& pop, const FitnessFn& fitness,
                         const GaConfig& ga, int generation, std::vector<double>& out) {
  out.resize(pop.size());
  auto eval_one = [&](std::size_t i) {
    double f;
    try {
      f = fitness(pop[i], derive_seed(ga.rng_seed, generation, static_cast<int>(i)));
    } catch (const std::exception&) {
      f = ga.fitness_floor;
    }
    out[i] = std::isfinite(f) ? f : ga.fitness_floor;
  };

  unsigned n_threads = ga.threads > 0 ? unsigned(ga.threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, pop.size());
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < pop.size(); ++i) eval_one(i);
    return;
  }

  std::atomic<std::size_t> cursor{0};
  std::vector<std::thread> workers;
  workers.reserve(n_threads);
  for (unsigned t = 0; t < n_threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = cursor.fetch_add(1); i < pop.size(); i = cursor.fetch_add(1)) {
        eval_one(i);
      }
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace

EvolveResult evolve(const GaConfig& ga, const FitnessFn& fitness,
                    const GenerationCallback& on_generation) {
  ga.validate();

  Rng rng(ga.rng_seed);
  std::vector<Chromosome> population;
  population.reserve(ga.population_size);
  for (int i = 0; i < ga.population_size; ++i) {
    population.push_back(random_chromosome(ga.bounds, rng));
  }

  EvolveResult result;
  result.best_fitness = -std::numeric_limits<double>::infinity();
  std::vector<double> fitnesses;

  for (int gen = 0; gen < ga.generations; ++gen) {
    evaluate_population(population, fitness, ga, gen, fitnesses);

    std::size_t best_i = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < fitnesses.size(); ++i) {
      sum += fitnesses[i];
      if (fitnesses[i] > fitnesses[best_i]) best_i = i;
    }

    GenerationStats stats;
    stats.generation = gen;
    stats.best_fitness = fitnesses[best_i];
    stats.mean_fitness = sum / double(fitnesses.size());
    stats.best_chromosome = population[best_i];
    result.history.generations.push_back(stats);
    if (on_generation) on_generation(stats);

    if (stats.best_fitness > result.best_fitness) {
      result.best_fitness = stats.best_fitness;
      result.best = stats.best_chromosome;
    }
    if (gen + 1 == ga.generations) break;

    std::vector<Chromosome> next;
    next.reserve(ga.population_size);
    if (ga.elitism) next.push_back(population[best_i]);
    while (int(next.size()) < ga.population_size) {
      const std::size_t i1 = tournament_select(fitnesses, ga.tournament_size, ga.tournament_p, rng);
      const std::size_t i2 = tournament_select(fitnesses, ga.tournament_size, ga.tournament_p, rng);
      auto [c1, c2] = two_point_crossover(population[i1], population[i2], ga.crossover_p, rng);
      next.push_back(mutate(c1, ga.mutation_p, ga.bounds, rng));
      if (int(next.size()) < ga.population_size) {
        next.push_back(mutate(c2, ga.mutation_p, ga.bounds, rng));
      }
    }
    population = std::move(next);
  }
  return result;
}

EvolveResult evolve_walker(const GaConfig& ga, const coupling::SimConfig& sim,
                           const GenerationCallback& on_generation) {
  sim.validate();
  const FitnessFn fitness = [&ga, &sim](const Chromosome& c, std::uint64_t seed) {
    const auto controller = make_controller(c, ga.bounds, sim.initial_state);
    return fitness_displacement(coupling::simulate_episode(controller, sim, sim.duration, seed));
  };
  return evolve(ga, fitness, on_generation);
}

}  // namespace walker::evolution
