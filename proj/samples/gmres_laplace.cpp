// Unrestarted GMRES on a 3D Laplacian: CGS2 and DCGS2 give the same residual
// history, DCGS2 with a third of the reductions.
#include <cstdio>

#include "kls/kls.hpp"

int main() {
  using namespace kls;
  const auto L = laplace3d(16, 16, 16);
  const auto b = bench::default_rhs(L);
  GmresConfig cfg;
  cfg.max_iters = 60;

  cfg.scheme = Scheme::Cgs2;
  const auto a = gmres_solve(L, b, cfg);
  cfg.scheme = Scheme::Dcgs2;
  const auto d = gmres_solve(L, b, cfg);

  std::printf("%5s %14s %14s %8s %8s\n", "iter", "relres cgs2", "relres dcgs2", "red", "red");
  for (Index i = 0; i < a.residuals.size(); i += 10)
    std::printf("%5lld %14.6e %14.6e %8llu %8llu\n", (long long)i, a.residuals[i], d.residuals[i],
                (unsigned long long)a.reductions[i], (unsigned long long)d.reductions[i]);
  std::printf("final backward error %.2e\n", d.backward_errors.back());
}
