// Factor an ill-conditioned tall matrix with each scheme and print the
// loss of orthogonality next to the number of global reductions.
#include <cstdio>
#include <string>

#include "kls/kls.hpp"

int main() {
  using namespace kls;
  const DenseColMat A = synthetic_kappa(1000, 40, 1e10, 42);
  std::printf("%-12s %12s %12s %10s\n", "scheme", "loo", "rre", "reductions");
  for (Scheme s : all_schemes) {
    SyncLedger led;
    try {
      const auto f = factorize(A, s, &led);
      std::printf("%-12s %12.3e %12.3e %10llu\n", std::string(scheme_id(s)).c_str(),
                  loss_of_orthogonality(f.q.view()), representation_error_qr(A, f.q.view(), f.r),
                  (unsigned long long)led.reductions);
    } catch (const std::exception& e) {
      std::printf("%-12s %s\n", std::string(scheme_id(s)).c_str(), e.what());
    }
  }
}
