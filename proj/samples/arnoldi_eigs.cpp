// Largest eigenvalues of the 2D convection-diffusion operator with
// Krylov-Schur over DCGS2 Arnoldi, checked against the closed form.
#include <cstdio>

#include "kls/kls.hpp"

int main() {
  using namespace kls;
  const ManteuffelSpec spec{20};
  const auto A = manteuffel_build(spec);

  KrylovSchurConfig cfg;
  cfg.max_basis = 40;
  cfg.nev = 8;
  cfg.max_restarts = 100;
  SyncLedger led;
  const auto r = krylov_schur_run(A, cfg, 1, &led);

  const auto rep = match_eigenvalues(r.values, manteuffel_eigenvalues(spec), cfg.tol);
  for (Index i = 0; i < r.values.size(); ++i)
    std::printf("%2lld  %.10f %+.10fi  residual %.1e  error %.1e\n", (long long)i, r.values[i].real(),
                r.values[i].imag(), r.residuals[i], rep.forward_error[i]);
  std::printf("restarts %lld, reductions %llu\n", (long long)r.restarts, (unsigned long long)led.reductions);
}
