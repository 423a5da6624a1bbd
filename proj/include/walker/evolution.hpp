#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "walker/coupling.hpp"
#include "walker/cpg.hpp"

namespace walker::evolution {

constexpr int kNumGenes = 25;

// Gene layout: [w, u0, tau, tau', beta, w1..w8, w1*..w8*, a1, a2, a1*, a2*].
enum Gene : int {
  kW = 0,
  kU0 = 1,
  kTau = 2,
  kTauPrime = 3,
  kBeta = 4,
  kConn0 = 5,      // w1..w8 -> indices 5..12
  kConnGate0 = 13, // w1*..w8* -> indices 13..20
  kA1 = 21,
  kA2 = 22,
  kA1Gate = 23,
  kA2Gate = 24,
};

const char* gene_name(int index);

using Chromosome = std::array<double, kNumGenes>;

struct GeneBounds {
  std::array<std::pair<double, double>, kNumGenes> intervals;

  void validate_chromosome(const Chromosome& c) const;  // names offending gene
  static GeneBounds defaults();
};

struct Decoded {
  cpg::OscillatorParams params;  // hip parameters; build_network halves knee taus
  cpg::ConnectivityMatrix connectivity;
  coupling::FeedbackGains gains;
};

// Gate genes threshold at 0.5: a connection (or feedback gain) is either its
// weight gene verbatim or exactly zero. Weights land in the canonical matrix
// cells and are mirrored left<->right; hip->knee stays one-way.
Decoded decode(const Chromosome& c, const GeneBounds& bounds = GeneBounds::defaults());

coupling::Controller make_controller(const Chromosome& c,
                                     const GeneBounds& bounds = GeneBounds::defaults(),
                                     const cpg::InitialStateRule& rule = {});

using Rng = std::mt19937_64;

Chromosome random_chromosome(const GeneBounds& bounds, Rng& rng);

// Size-k tournament: the best of the sampled contestants wins with probability
// p, the next best with p*(1-p), ...; the last contestant absorbs the rest.
std::size_t tournament_select(std::span<const double> fitnesses, std::size_t size, double p,
                              Rng& rng);

// Interior cut points i < j in [1, 24]; segment [i, j) swaps with probability
// crossover_p, otherwise the parents pass through unchanged.
std::pair<Chromosome, Chromosome> two_point_crossover(const Chromosome& p1, const Chromosome& p2,
                                                      double crossover_p, Rng& rng);

// With probability mutation_p one uniformly chosen gene is redrawn in bounds.
Chromosome mutate(const Chromosome& c, double mutation_p, const GeneBounds& bounds, Rng& rng);

double fitness_displacement(const coupling::EpisodeResult& result);

struct GaConfig {
  int population_size = 200;
  int tournament_size = 8;
  double tournament_p = 0.75;
  double crossover_p = 0.8;
  double mutation_p = 0.3;
  bool elitism = true;
  int generations = 50;
  std::uint64_t rng_seed = 1;
  int threads = 0;               // 0 = hardware concurrency
  double fitness_floor = -10.0;  // assigned when an evaluation blows up
  GeneBounds bounds = GeneBounds::defaults();

  void validate() const;
};

struct GenerationStats {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  Chromosome best_chromosome{};
};

struct GaHistory {
  std::vector<GenerationStats> generations;
};

struct EvolveResult {
  Chromosome best{};
  double best_fitness = 0.0;
  GaHistory history;
};

// Fitness of one individual; the seed is derived from (run seed, generation,
// index) so evaluations stay schedule-independent under parallelism.
using FitnessFn = std::function<double(const Chromosome&, std::uint64_t seed)>;
using GenerationCallback = std::function<void(const GenerationStats&)>;

EvolveResult evolve(const GaConfig& ga, const FitnessFn& fitness,
                    const GenerationCallback& on_generation = {});

// Displacement-fitness GA over simulated walking episodes.
EvolveResult evolve_walker(const GaConfig& ga, const coupling::SimConfig& sim,
                           const GenerationCallback& on_generation = {});

}  // namespace walker::evolution
