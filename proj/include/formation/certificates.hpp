#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "formation/controllers.hpp"
#include "formation/graph.hpp"

namespace formation {

// Decision thresholds, each relative to the spectral norm of the matrix under
// test so verdicts do not depend on the scale of the target.
inline constexpr double kTolPositiveDefinite = 1e-8;
inline constexpr double kTolHyperbolic = 1e-7;
inline constexpr double kTolInvertible = 1e-10;
inline constexpr int kDefaultAdmissibilitySamples = 5;
inline constexpr std::size_t kDefaultPersistenceCap = 1'000'000;

enum class Verdict { pass, fail, indeterminate };
std::string_view to_string(Verdict v);

using Spectrum = std::vector<std::complex<double>>;

/// Eigenvalues sorted by real part, then imaginary part.
Spectrum sorted_eigenvalues(const Eigen::MatrixXd &m);

/// Outcome of the restricted positive-definiteness test.
struct CertificateReport {
  std::string kind;               // which controller the test was run for
  Verdict verdict = Verdict::indeterminate;
  double min_sym_eigenvalue = 0.0; // of S = P^T (eta + eta^T) P / 2
  double spectral_norm = 0.0;      // of S
  Spectrum spectrum;               // of A = P^T eta P, one entry per tangent dim
  int rank_r = 0;                  // dim T_{m*}Q
  double tol_pd = kTolPositiveDefinite;
  std::string diagnostic;
};

/// Test on an explicit orthonormal tangent basis. Used directly to check
/// that the verdict does not depend on the choice of basis.
CertificateReport sym_form_certificate(const Eigen::MatrixXd &eta,
                                       const Eigen::MatrixXd &basis);

/// Builds eta* at (p*, F(p*)) and P = tangent_basis(p*), then checks that
/// S = P^T (eta* + eta*^T) P / 2 is positive definite. A non-regular p* gives
/// an indeterminate report.
CertificateReport restricted_sym_form(const ControllerSpec &spec,
                                      const Configuration &p_star);

struct LinearizedEdgeDynamics {
  Eigen::MatrixXd restricted; // A = P^T eta* P; the linear flow is e' = -A e
  Spectrum eigenvalues;
  int rank_r = 0;
};

/// Throws std::domain_error when p* is not a regular point.
LinearizedEdgeDynamics linearized_edge_matrix(const ControllerSpec &spec,
                                              const Configuration &p_star);

struct AdmissibilityOptions {
  int samples = kDefaultAdmissibilitySamples;
  std::uint64_t seed = kDefaultSeed;
  int max_attempts_per_sample = 20; // resample cap for non-regular draws
  int jobs = 1;
};

struct AdmissibilitySample {
  std::uint64_t seed = 0;
  int attempts = 0;
  bool regular = false;
  double min_abs_real = 0.0; // min |Re lambda| over the spectrum of A
  double min_abs = 0.0;      // min |lambda|
  double spectral_norm = 0.0;
  bool hyperbolic = false;
  bool invertible = false;
  Spectrum spectrum;
};

/// Randomized generic test. Verdicts are numerical: each sample decides the
/// generic property with probability one, but not as a proof.
struct AdmissibilityReport {
  Verdict dynamic = Verdict::indeterminate;
  Verdict algebraic = Verdict::indeterminate;
  std::vector<AdmissibilitySample> samples;
  std::uint64_t seed = 0;
};

/// Runs both admissibility tests on random targets. `orientation` must be
/// present iff kind == directed.
AdmissibilityReport admissibility(ControllerKind kind, const Graph &graph,
                                  const std::optional<Orientation> &orientation,
                                  int d, const AdmissibilityOptions &opts = {});

/// Hyperbolicity of the restricted eta at generic targets.
Verdict dynamic_admissibility(ControllerKind kind, const Graph &graph,
                              const std::optional<Orientation> &orientation,
                              int d, const AdmissibilityOptions &opts = {});

/// Invertibility of the restricted eta at generic targets.
Verdict algebraic_admissibility(ControllerKind kind, const Graph &graph,
                                const std::optional<Orientation> &orientation,
                                int d, const AdmissibilityOptions &opts = {});

enum class PersistenceVerdict { persistent, not_persistent, indeterminate };
std::string_view to_string(PersistenceVerdict v);

struct PersistenceOptions {
  std::uint64_t seed = kDefaultSeed;
  std::size_t cap = kDefaultPersistenceCap;
  int jobs = 1;
};

struct PersistenceReport {
  PersistenceVerdict verdict = PersistenceVerdict::indeterminate;
  std::size_t reductions_total = 0;   // product of C(outdeg, d)
  std::size_t reductions_checked = 0;
  std::size_t flexible_reductions = 0;
  std::optional<Graph> witness;       // first flexible reduction found
};

/// Number of reductions: product over vertices with out-degree > d of
/// C(outdeg, d). Saturates at SIZE_MAX.
std::size_t reduction_count(const Orientation &orientation, int d);

/// Keeps exactly d out-edges at every vertex of larger out-degree, in every
/// combination, and requires each resulting undirected graph to be
/// generically d-rigid. d must be 2 or 3.
PersistenceReport persistence_check(const Orientation &orientation, int d,
                                    const PersistenceOptions &opts = {});

} // namespace formation
