#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blockadmm/block_model.hpp"
#include "blockadmm/spectral.hpp"

namespace blockadmm {

/// Where a tau vector came from.
enum class TauRule {
  kFadmmTheory,   // (rho^2 / 2mu) ||A_D^T A_tri||^2 + rho ||A_j||^2
  kHadmmTheory,   // (rho^2 / 2mu) ||G_D^T G_tri||^2 + rho ||G_i||^2, j in S_i
  kJadmmTheory,   // rho (n - 1) ||A_j||^2
  kHadmm2Theory,  // rho ||G_i||^2, j in S_i, two groups
  kUniformManual,
  kPerBlockManual
};

/// "fadmm-theory", "hadmm-theory", "jadmm-theory", "hadmm2-theory", "uniform-manual",
/// "per-block-manual".
std::string to_string(TauRule rule);
TauRule tau_rule_from_string(const std::string& name);

/// Per-block regularizers P_j = tau_j I - rho A_j^T A_j.
///
/// `explicit_regularizers`, when non-empty, overrides the tau form with arbitrary
/// symmetric P_j (quadratic objectives only); tau is then informational.
struct RegularizerPolicy {
  TauRule rule = TauRule::kPerBlockManual;
  VectorXd tau;
  double safety_factor = 1.0;
  std::string note;
  std::vector<MatrixXd> explicit_regularizers;

  bool has_explicit_regularizers() const { return !explicit_regularizers.empty(); }
};

/// Theoretical tau from precomputed spectra. `grouping` is required for the
/// hadmm rules (and must have two groups for hadmm2). Throws NotStronglyConvexError
/// for mu <= 0 with a mu-dependent rule and DegenerateTauError when any tau_j <= 0.
RegularizerPolicy tau_theory(TauRule rule, const SpectralReport& spectra, Index num_blocks,
                             const Grouping* grouping, double rho, double mu,
                             double safety = 1.0);

/// Convenience overload computing the needed spectra first.
RegularizerPolicy tau_theory(TauRule rule, const BlockMatrix& a, const Grouping* grouping,
                             double rho, double mu, double safety = 1.0,
                             const PowerIterationOptions& options = {});

/// The raw formula values (no positivity check); used to report degenerate rules.
VectorXd tau_theory_raw(TauRule rule, const SpectralReport& spectra, Index num_blocks,
                        const Grouping* grouping, double rho, double mu, double safety = 1.0);

/// The same tau for every block.
RegularizerPolicy tau_uniform(double value, Index num_blocks);

RegularizerPolicy tau_per_block(VectorXd tau);

/// (rho^2 / 2) ||A||_2^4, the base of the tuned uniform sweeps.
double tuned_tau_base(double full_norm, double rho);

}  // namespace blockadmm
