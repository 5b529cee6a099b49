#pragma once

#include <random>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace mpaths {

enum class NormTag { L2, L1, Linf };

std::string_view to_string(NormTag tag);
NormTag norm_from_string(std::string_view name);

double norm(const Eigen::VectorXd& v, NormTag tag);

/// Euclidean projection onto the unit ball of `tag`, followed by radial
/// scaling onto the unit sphere. Zero vectors are returned unchanged.
Eigen::VectorXd project_to_sphere(const Eigen::VectorXd& v, NormTag tag);

/// Uniform sample on the unit sphere of `tag` (surface measure).
Eigen::VectorXd sample_sphere(std::size_t dim, NormTag tag, std::mt19937_64& rng);

}  // namespace mpaths
