#include "blockadmm/tau_policy.hpp"

#include <cmath>
#include <sstream>

#include "blockadmm/errors.hpp"

namespace blockadmm {

std::string to_string(TauRule rule) {
  switch (rule) {
    case TauRule::kFadmmTheory:
      return "fadmm-theory";
    case TauRule::kHadmmTheory:
      return "hadmm-theory";
    case TauRule::kJadmmTheory:
      return "jadmm-theory";
    case TauRule::kHadmm2Theory:
      return "hadmm2-theory";
    case TauRule::kUniformManual:
      return "uniform-manual";
    case TauRule::kPerBlockManual:
      return "per-block-manual";
  }
  return "unknown";
}

TauRule tau_rule_from_string(const std::string& name) {
  for (TauRule rule : {TauRule::kFadmmTheory, TauRule::kHadmmTheory, TauRule::kJadmmTheory,
                       TauRule::kHadmm2Theory, TauRule::kUniformManual,
                       TauRule::kPerBlockManual}) {
    if (to_string(rule) == name) return rule;
  }
  throw InvalidConfigError("unknown tau rule '" + name + "'");
}

namespace {

bool needs_mu(TauRule rule) {
  return rule == TauRule::kFadmmTheory || rule == TauRule::kHadmmTheory;
}

bool needs_grouping(TauRule rule) {
  return rule == TauRule::kHadmmTheory || rule == TauRule::kHadmm2Theory;
}

const GroupSpectra& group_spectra_for(const SpectralReport& spectra, const Grouping& grouping) {
  const GroupSpectra* g = spectra.find(grouping);
  if (g == nullptr) {
    throw InvalidConfigError("spectral report has no entry for the requested grouping");
  }
  return *g;
}

}  // namespace

VectorXd tau_theory_raw(TauRule rule, const SpectralReport& spectra, Index num_blocks,
                        const Grouping* grouping, double rho, double mu, double safety) {
  if (!(rho > 0.0)) throw InvalidParameterError("rho must be positive");
  if (!(safety >= 1.0)) throw InvalidParameterError("safety factor must be >= 1");
  if (needs_mu(rule) && !(mu > 0.0)) {
    throw NotStronglyConvexError(to_string(rule) +
                                 " requires a strongly convex objective (mu > 0), got mu = " +
                                 std::to_string(mu));
  }
  if (needs_grouping(rule) && grouping == nullptr) {
    throw InvalidGroupingError(to_string(rule) + " requires a grouping");
  }
  if (rule == TauRule::kHadmm2Theory && grouping->num_groups() != 2) {
    throw InvalidGroupingError("hadmm2-theory requires exactly two groups, got " +
                               std::to_string(grouping->num_groups()));
  }
  const bool uses_blocks = rule == TauRule::kFadmmTheory || rule == TauRule::kJadmmTheory;
  if (uses_blocks && static_cast<Index>(spectra.block_norms.size()) != num_blocks) {
    throw InvalidConfigError("spectral report lacks per-block norms");
  }

  VectorXd tau(num_blocks);
  switch (rule) {
    case TauRule::kFadmmTheory: {
      const double c = spectra.coupling_norm_blocks;
      const double shift = rho * rho / (2.0 * mu) * c * c;
      for (Index j = 0; j < num_blocks; ++j) {
        const double a = spectra.block_norms[static_cast<std::size_t>(j)];
        tau[j] = shift + rho * a * a;
      }
      break;
    }
    case TauRule::kJadmmTheory: {
      for (Index j = 0; j < num_blocks; ++j) {
        const double a = spectra.block_norms[static_cast<std::size_t>(j)];
        tau[j] = rho * static_cast<double>(num_blocks - 1) * a * a;
      }
      break;
    }
    case TauRule::kHadmmTheory:
    case TauRule::kHadmm2Theory: {
      const GroupSpectra& g = group_spectra_for(spectra, *grouping);
      const double c = g.coupling_norm;
      const double shift = rule == TauRule::kHadmmTheory ? rho * rho / (2.0 * mu) * c * c : 0.0;
      for (Index i = 0; i < grouping->num_groups(); ++i) {
        const double a = g.group_norms[static_cast<std::size_t>(i)];
        const double value = shift + rho * a * a;
        for (Index j : grouping->group(i)) tau[j] = value;
      }
      break;
    }
    case TauRule::kUniformManual:
    case TauRule::kPerBlockManual:
      throw InvalidConfigError(to_string(rule) + " is not a theoretical rule");
  }
  return safety * tau;
}

RegularizerPolicy tau_theory(TauRule rule, const SpectralReport& spectra, Index num_blocks,
                             const Grouping* grouping, double rho, double mu, double safety) {
  VectorXd tau = tau_theory_raw(rule, spectra, num_blocks, grouping, rho, mu, safety);
  for (Index j = 0; j < tau.size(); ++j) {
    if (!(tau[j] > 0.0)) {
      std::ostringstream msg;
      msg << to_string(rule) << " gives tau[" << j << "] = " << tau[j];
      if (rule == TauRule::kJadmmTheory && num_blocks == 1) msg << " (single block: n - 1 = 0)";
      msg << "; P_j must be positive definite";
      throw DegenerateTauError(msg.str());
    }
  }
  RegularizerPolicy policy;
  policy.rule = rule;
  policy.tau = std::move(tau);
  policy.safety_factor = safety;
  std::ostringstream note;
  note << to_string(rule) << " with rho=" << rho;
  if (needs_mu(rule)) note << ", mu=" << mu;
  if (grouping != nullptr && needs_grouping(rule)) note << ", groups=" << grouping->num_groups();
  note << ", safety=" << safety;
  policy.note = note.str();
  return policy;
}

RegularizerPolicy tau_theory(TauRule rule, const BlockMatrix& a, const Grouping* grouping,
                             double rho, double mu, double safety,
                             const PowerIterationOptions& options) {
  SpectralRequest request;
  request.full_norm = false;
  request.block_norms = rule == TauRule::kFadmmTheory || rule == TauRule::kJadmmTheory;
  request.coupling = rule == TauRule::kFadmmTheory;
  if (needs_grouping(rule) && grouping != nullptr) request.groupings.push_back(*grouping);
  // Validate cheap preconditions before running power iterations.
  if (needs_mu(rule) && !(mu > 0.0)) {
    throw NotStronglyConvexError(to_string(rule) +
                                 " requires a strongly convex objective (mu > 0), got mu = " +
                                 std::to_string(mu));
  }
  const SpectralReport spectra = compute_spectral_report(a, request, options);
  return tau_theory(rule, spectra, a.num_blocks(), grouping, rho, mu, safety);
}

RegularizerPolicy tau_uniform(double value, Index num_blocks) {
  if (!(value > 0.0)) {
    throw InvalidParameterError("uniform tau must be positive, got " + std::to_string(value));
  }
  RegularizerPolicy policy;
  policy.rule = TauRule::kUniformManual;
  policy.tau = VectorXd::Constant(num_blocks, value);
  policy.note = "uniform tau = " + std::to_string(value);
  return policy;
}

RegularizerPolicy tau_per_block(VectorXd tau) {
  for (Index j = 0; j < tau.size(); ++j) {
    if (!(tau[j] > 0.0)) {
      throw InvalidParameterError("tau[" + std::to_string(j) + "] must be positive");
    }
  }
  RegularizerPolicy policy;
  policy.rule = TauRule::kPerBlockManual;
  policy.tau = std::move(tau);
  policy.note = "per-block manual tau";
  return policy;
}

double tuned_tau_base(double full_norm, double rho) {
  const double sq = full_norm * full_norm;
  return 0.5 * rho * rho * sq * sq;
}

}  // namespace blockadmm
