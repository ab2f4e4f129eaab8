#pragma once

// Spider's-web certificates: a base radius R with radii rho_n satisfying
//   rho_n > M^n(R)   and   m(rho_n) >= rho_{n+1},
// plus grid-level detection of bounded complementary components of the
// level sets and the holes around 0.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qrlab/escape.hpp"
#include "qrlab/grid.hpp"
#include "qrlab/modulus.hpp"

namespace qrlab {

// Slack allowed in log coordinates on the chain condition m(rho_n) >= rho_{n+1}.
inline constexpr double kCertificateLogTolerance = 1e-9;

struct CertificateEntry {
  int n = 0;
  double log_rho = 0.0;
  double log_Mn = 0.0;     // log M^n(R)
  double log_m_rho = 0.0;  // log m(rho_n)
};

struct SpiderwebCertificate {
  std::string profile_id;
  double R = 0.0;
  int N = 0;                  // requested length
  int budget = 0;             // sphere samples behind m and M (0 = exact profile)
  bool overflow_truncated = false;  // b M^n(R) left double range before N
  std::vector<CertificateEntry> entries;
};

struct CertifyOutcome {
  bool success = false;
  SpiderwebCertificate certificate;  // selected prefix, also on failure
  std::optional<int> failed_at;      // first n with no admissible rho_{n+1}
  double log_shortfall = 0.0;        // log(a M^{n+1}(R)) - log m(rho_n) at failure
};

// Greedy search: rho_n among `candidates` log-spaced points of
// [a M^n(R), b M^n(R)], restricted to rho_n <= m(rho_{n-1}), maximizing m(rho_n).
// Sampled profiles are used with the refined minimum.
CertifyOutcome certify_spiderweb(const ModulusProfile& profile, double R, int N, double a, double b,
                                 int candidates = 257);

struct VerifyReport {
  bool ok = false;
  bool degenerate = false;            // empty sequence
  std::vector<double> rho_margin;     // log rho_n - log M^n(R)
  std::vector<double> chain_margin;   // log m(rho_n) - log rho_{n+1}, n < N
  std::optional<int> first_failure;
};

// Recomputes M^n(R) and m(rho_n) at twice the certificate's budget.
VerifyReport verify_certificate(const SpiderwebCertificate& cert, const ModulusProfile& profile);

// Line-oriented text form; doubles are written in shortest round-trip form.
void write_certificate(const SpiderwebCertificate& cert, std::ostream& os);
SpiderwebCertificate read_certificate(std::istream& is);

struct BoundedComplementReport {
  int level = 0;
  std::size_t count = 0;
  std::vector<grid::GridMask> components;
  bool window_relative = true;  // bounded within this box only
};

// Cells of A_R^L: level present and >= L.
grid::GridMask level_mask(const ClassField& field, int L);
BoundedComplementReport detect_bounded_complement(const ClassField& field, int L);

struct HoleLoop {
  int level = 0;
  std::optional<grid::GridMask> hole;  // complement component containing the 0-cell
  std::optional<grid::GridMask> loop;  // level-set cells adjacent to the hole
};

struct HoleLoopSequence {
  std::vector<HoleLoop> entries;
  bool nesting_ok = true;  // H_n subset of H_{n+1} wherever both are defined
  std::vector<int> nesting_violations;
  // Per entry k: smallest offset d such that loop k is disjoint from loop k+d'
  // for every d' >= d in range (observed only).
  std::vector<std::optional<int>> disjoint_from;
};

HoleLoopSequence fundamental_holes(const ClassField& field, int level_lo, int level_hi);
HoleLoopSequence fundamental_holes(const std::vector<grid::GridMask>& level_masks, int first_level);

}  // namespace qrlab
