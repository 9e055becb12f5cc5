#pragma once

#include <array>

#include "svsnltv/graph.hpp"
#include "svsnltv/image.hpp"
#include "svsnltv/kernel.hpp"

namespace svsnltv {

enum class Fidelity { l2, l1 };

struct RegWeights {
  double mu = 0.05;   ///< weight of the value term
  double alpha = 1.0; ///< regularization strength

  void validate() const;
};

/// Anisotropic SVS-NLTV evaluated edge by edge from the RGB differences:
/// Σ |∇s1| + |∇s2| + μ Σ |∇v|.
double svs_nltv(const ColorImage& u, const NonlocalGraph& g, double mu);

/// The same functional computed through the coefficients q = P u and the
/// generic nonlocal gradient.
double svs_nltv_qform(const ColorImage& u, const NonlocalGraph& g, double mu);

/// Per-channel nonlocal TV with one graph per RGB channel.
double nltv(const ColorImage& u, const std::array<NonlocalGraph, 3>& g_rgb);

/// ½‖K*u − f‖₂² (l2) or ½‖K*u − f‖₁ (l1), periodic convolution per channel.
double data_term(const ColorImage& u, const ColorImage& f, const BlurKernel& k, Fidelity fidelity);

/// α·SVS-NLTV(u) + data_term.
double objective(const ColorImage& u, const ColorImage& f, const BlurKernel& k, const NonlocalGraph& g,
                 const RegWeights& weights, Fidelity fidelity);

/// α·NLTV(u) + data_term, the baseline model's objective.
double objective_nltv(const ColorImage& u, const ColorImage& f, const BlurKernel& k,
                      const std::array<NonlocalGraph, 3>& g_rgb, double alpha, Fidelity fidelity);

}  // namespace svsnltv
