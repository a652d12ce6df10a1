#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "modular.hpp"
#include "witness.hpp"

namespace pxlab {

enum class EmbeddingKind { B, B0, Ctilde };

inline const char* to_string(EmbeddingKind k) {
  switch (k) {
    case EmbeddingKind::B: return "B";
    case EmbeddingKind::B0: return "B0";
    case EmbeddingKind::Ctilde: return "Ctilde";
  }
  return "?";
}

// Sampled lower bound of sup ||w||_target / ||grad w||_p over mean-zero w.
// For Ctilde the denominator is ||grad w||_p^theta ||w||_2^(1-theta).
struct EmbeddingEstimate {
  EmbeddingKind kind = EmbeddingKind::B0;
  double constant = 0.0;
  double theta = 0.0;
  std::size_t trials = 0;
  std::string best_witness;
};

struct EmbeddingOptions {
  int max_mode = 4;
  int ascent_steps = 12;
  double norm_tol = 1e-10;
};

inline EmbeddingEstimate estimate_embedding(const ExponentField& p,
                                            const std::optional<ExponentField>& target,
                                            std::size_t trials, std::uint64_t seed,
                                            EmbeddingKind kind, const EmbeddingOptions& opt = {}) {
  const Grid& g = p.grid();
  if (target) require_same_grid(g, target->grid());
  if (kind != EmbeddingKind::B0 && !target) throw error("embedding estimate needs a target exponent");
  EmbeddingEstimate est;
  est.kind = kind;
  est.trials = trials;
  if (kind == EmbeddingKind::Ctilde) {
    const auto th = gn_theta(p.p_minus(), target->p_plus(), g.dimension);
    if (!th.in_unit_interval) throw error("interpolation exponent outside (0,1)");
    est.theta = th.theta;
  }
  WitnessSource src(g, seed, opt.max_mode);
  auto ratio = [&](const std::vector<double>& c) {
    const GridFunction w = src.basis().synthesize(c);
    const double gn = luxemburg_norm(gradient_magnitude(w), p, opt.norm_tol).value;
    if (!(gn > 0.0)) return -std::numeric_limits<double>::infinity();
    const double l2 = std::sqrt(l2_squared(w));
    switch (kind) {
      case EmbeddingKind::B0: return l2 / gn;
      case EmbeddingKind::B: return luxemburg_norm(w, *target, opt.norm_tol).value / gn;
      case EmbeddingKind::Ctilde:
        return luxemburg_norm(w, *target, opt.norm_tol).value /
               (std::pow(gn, est.theta) * std::pow(l2, 1.0 - est.theta));
    }
    return 0.0;
  };
  for (std::size_t i = 0; i < trials; ++i) {
    const Witness w = src.make(i);
    const double v0 = ratio(w.coeffs);
    if (!std::isfinite(v0)) continue;  // constant witness
    auto rng = src.stream(i, 1);
    const double v = perturbation_search(w.coeffs, v0, ratio, opt.ascent_steps, rng).second;
    if (v > est.constant) {
      est.constant = v;
      est.best_witness = w.id;
    }
  }
  return est;
}

}  // namespace pxlab
