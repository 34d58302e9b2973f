#include "holoq/tridiagonal.hpp"

#include <stdexcept>
#include <string>
#include <vector>

#include <lapacke.h>

namespace holoq {

TridiagonalEigen tridiagonal_eigen(std::span<const double> diagonal,
                                   std::span<const double> sub_diagonal, int count,
                                   bool want_vectors) {
  const auto n = static_cast<lapack_int>(diagonal.size());
  if (n == 0) throw std::invalid_argument("tridiagonal_eigen: empty matrix");
  if (sub_diagonal.size() + 1 != diagonal.size())
    throw std::invalid_argument("tridiagonal_eigen: sub-diagonal must have n - 1 entries");
  const lapack_int wanted = (count < 0 || count > n) ? n : count;

  // dstevr overwrites d and e; e needs length n.
  std::vector<double> d(diagonal.begin(), diagonal.end());
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  std::copy(sub_diagonal.begin(), sub_diagonal.end(), e.begin());

  TridiagonalEigen out;
  out.values.resize(n);
  if (want_vectors) out.vectors.resize(n, wanted);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(std::max<lapack_int>(wanted, 1)));
  lapack_int found = 0;
  double dummy = 0.0;
  const char range = wanted == n ? 'A' : 'I';
  const lapack_int info = LAPACKE_dstevr(
      LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', range, n, d.data(), e.data(), 0.0, 0.0, 1,
      wanted, 0.0, &found, out.values.data(), want_vectors ? out.vectors.data() : &dummy,
      want_vectors ? n : 1, support.data());
  if (info != 0 || found != wanted)
    throw std::runtime_error("dstevr failed (info=" + std::to_string(info) + ")");
  out.values.conservativeResize(wanted);
  return out;
}

TridiagonalEigen tridiagonal_eigen(std::span<const double> diagonal, double sub_diagonal,
                                   int count, bool want_vectors) {
  std::vector<double> e(diagonal.empty() ? 0 : diagonal.size() - 1, sub_diagonal);
  return tridiagonal_eigen(diagonal, std::span<const double>(e), count, want_vectors);
}

}  // namespace holoq
