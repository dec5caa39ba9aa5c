#pragma once

#include <vector>

#include "glassland/mixture.hpp"

namespace glassland::presets {

// xi(t) = 2t + t^2/2, one species.
MixtureSpec linear_quadratic();

// Two equal species: xi' = (4,4), xi'' = [[1,.5],[.5,1]] realized with
// gamma_1^2 = 5, gamma_ss^2 = 2, gamma_12^2 = 1.
MixtureSpec symmetric_pair();

// Two species with lambda = (0.3, 0.7): xi' = (4.5,4.5),
// xi'' = [[1,2.4],[2.4,1]], realized by degree 1 and 2 terms.
MixtureSpec skewed_pair();

// Two equal species, gamma^(1) = (1,1), every gamma^(2) = 1, every
// gamma^(3) = 0.2; xi(x) = S/2 + S^2/4 + S^3/200 with S = x_1 + x_2.
MixtureSpec cubic_pair();

// xi(t) = t^p.
MixtureSpec pure(int p);

// One species with gamma_k = gammas[k-1].
MixtureSpec single_species(const std::vector<double>& gammas);

// xi(t) = t^2/2 + t^3/2, no external field.
MixtureSpec half_quadratic_half_cubic();

}  // namespace glassland::presets
