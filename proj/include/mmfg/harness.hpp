#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmfg/lq_model.hpp"
#include "mmfg/simulator.hpp"

namespace mmfg {

/// One sampled state per row: the finite-N value functions against the
/// projected master solution, with the first-moment normalizer.
struct ConvergenceRow {
  int N;
  int sample_id;
  double e_minor;       // max_i |u^{N,i} - U(t0, x_i, x0, m^{N,i})|
  double e_major;       // |u^{N,0} - U0(t0, x0, m^N)|
  double m1;            // M_1(m^N)
  double e_minor_norm;  // e_minor / (1 + m1)
  double e_major_norm;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
};

/// Log-log least squares of per-N mean normalized errors against N.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  bool exact = false;  // all errors were zero; no regression possible
};

/// Solves the Nash system for every N in N_list (master solved once) and
/// evaluates both errors at t0 on `samples` random states: x0 uniform on
/// [-1,1]^{d0}, minors i.i.d. mu0. nt is the solver step count; the Nash
/// coefficient storage is thinned automatically to bound memory.
ConvergenceTable run_convergence(const LqSpec& spec, const Mu0& mu0,
                                 const std::vector<int>& N_list, int samples,
                                 double t0, uint64_t seed, int nt = 2000);

RateFit fit_rate(const ConvergenceTable& table);

struct VerifyCheck {
  std::string name;
  bool pass = false;
  bool skipped = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string note;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass && !c.skipped) return false;
    return true;
  }
};

/// Verification battery: residual maxima, Fenchel gap positivity, the
/// projected-solution residual bound and derivative identities,
/// exchangeability, cloud/mean consistency, cost identities and deviation
/// profiles. Solver errors surface as failed checks.
VerifyReport verify_all(const LqSpec& spec, const SimConfig& cfg, int nt,
                        int N_check, uint64_t seed);

}  // namespace mmfg
