#pragma once

#include <random>
#include <span>
#include <vector>

namespace layoutlab {

// Smallest set of tokens, taken in descending-probability order (lower id
// first on ties), whose mass reaches p.
std::vector<int> nucleus_set(std::span<const double> probs, double p);

// Full-length distribution restricted to the nucleus and renormalized.
std::vector<double> nucleus_distribution(std::span<const double> probs, double p);

int nucleus_sample(std::span<const double> probs, double p, std::mt19937_64& rng);

// Index of the largest entry; lowest index on ties.
int argmax(std::span<const double> values);

}  // namespace layoutlab
