#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace mhts {

using Vec = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

// Returns the zero vector unchanged.
Vec l2_normalized(std::span<const double> a);

// log(sum(exp(x_i))) without overflow.
double log_sum_exp(std::span<const double> xs);

// FNV-1a 64-bit; stable across platforms, used for seeding and feature
// hashing (never for artifact integrity — that is SHA-256).
uint64_t fnv1a64(std::string_view data, uint64_t seed = 1469598103934665603ull);

// SplitMix64 step; used to derive independent RNG seeds.
uint64_t splitmix64(uint64_t x);

}  // namespace mhts
