#pragma once

#include <span>
#include <vector>

namespace npr {

double normal_cdf(double z);
// Upper tail P(Z > z).
double normal_sf(double z);
double normal_quantile(double p);
// Upper tail P(chi2(dof) > x).
double chi2_sf(double x, double dof);
double chi2_cdf(double x, double dof);

// Holm's step-down procedure at family-wise level `alpha`. Hypotheses are
// visited in ascending p-value order (ties by index); the k-th smallest is
// rejected while p <= alpha / (m - k), and everything after the first
// retention is retained.
std::vector<bool> holm_step_down(std::span<const double> p_values, double alpha);

}  // namespace npr
