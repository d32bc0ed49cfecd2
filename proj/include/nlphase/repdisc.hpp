#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nlphase/frame.hpp"
#include "nlphase/gram.hpp"
#include "nlphase/phase_map.hpp"
#include "nlphase/spectrum.hpp"

namespace nlphase {

/// Pairwise commuting d x d matrices A_1..A_m and a vector ell in R^d. The group acts on R^d by
/// t . y = exp(sum t_k A_k) y.
struct GroupData {
  std::vector<Mat> A;
  Vec ell;

  int m() const { return static_cast<int>(A.size()); }
  int d() const { return static_cast<int>(ell.size()); }
};

/// Throws DomainError on shape mismatch or when some A_i A_j - A_j A_i exceeds 1e-12.
void validate(const GroupData& g);
/// phi(t) = exp(-sum t_k A_k)^T ell.
PhaseMap phase_from_group(const GroupData& g);

/// Built-in groups: heisenberg, poly2d, axb, shearlet.
GroupData group_preset(const std::string& name);
std::vector<std::string> group_preset_names();

/// Atoms s -> e^{2 pi i phi(s - gamma) . lambda} 1_Omega(s - gamma), lambda in Lambda,
/// gamma in Gamma.
struct WindowSystem {
  Box omega;
  std::vector<Vec> gammas;
  SpectrumSet spectrum;
  PhaseMap phi;
};

/// Throws DomainError when dimensions disagree or two translates of Omega overlap.
void validate(const WindowSystem& ws);

/// Value of the atom (lambda index a, gamma index g) at s. Omega is half-open.
Complex atom(const WindowSystem& ws, std::size_t a, std::size_t g, const Vec& s);
/// [pi(x, t) 1_Omega](s) = e^{2 pi i phi(s) . x} 1_Omega(s - t).
Complex group_action(const PhaseMap& phi, const Box& omega, const Vec& x, const Vec& t, const Vec& s);

enum class RepMode { Onb, Frame };

struct BlockReport {
  Vec gamma;
  double max_offdiag = 0.0;
  double diag_dev = 0.0;
  double quad_error = 0.0;
  double A = 0.0;
  double B = 0.0;
};

struct RepdiscOptions {
  RepMode mode = RepMode::Onb;
  double tol = 1e-10;
  FrameOptions frame;
  GramOptions gram;
  std::size_t cross_samples = 256;
  std::uint64_t seed = 0;
};

struct RepdiscReport {
  RepMode mode = RepMode::Onb;
  std::vector<BlockReport> blocks;
  double max_offdiag = 0.0;
  double max_diag_dev = 0.0;
  double quad_error = 0.0;
  double min_A = 0.0;
  double max_B = 0.0;
  /// Largest |a(s) conj(a'(s))| over sampled points for atoms of different blocks.
  double cross_block_max = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::string scope;
};

/// Gram (onb mode) or frame bounds (frame mode) of the atoms supported in the window W, which must
/// be a union of translates Omega + gamma. Atoms of different translates have disjoint supports,
/// so the Gram matrix is the direct sum of one block per gamma, each computed as
/// gram(Lebesgue(Omega + gamma), phi(. - gamma), Lambda).
RepdiscReport verify_system_on_window(const WindowSystem& ws, const Box& window, const QuadratureSpec& quad,
                                      const RepdiscOptions& options = {});

/// Kolmogorov-Smirnov distance between phi_*(Lebesgue on Omega), sampled n times, and `cdf`
/// (Omega one-dimensional, phi scalar).
double pushforward_ks(const PhaseMap& phi, const Box& omega, const std::function<double(double)>& cdf, std::size_t n,
                      std::uint64_t seed);

}  // namespace nlphase
