#include "nlphase/matrix_exp.hpp"

#include <array>
#include <cmath>

namespace nlphase {

namespace {

// Largest 1-norms for which each Pade degree meets unit roundoff in double precision.
constexpr std::array<double, 5> kTheta = {1.495585217958292e-2, 2.539398330063230e-1, 9.504178996162932e-1,
                                          2.097847961257068e0, 5.371920351148152e0};
constexpr std::array<int, 5> kDegree = {3, 5, 7, 9, 13};

std::vector<double> pade_coefficients(int m) {
  switch (m) {
    case 3: return {120, 60, 12, 1};
    case 5: return {30240, 15120, 3360, 420, 30, 1};
    case 7: return {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1};
    case 9: return {17643225600, 8821612800, 2075673600, 302702400, 30270240, 2162160, 110880, 3960, 90, 1};
    default:
      return {64764752532480000, 32382376266240000, 7771770303897600, 1187353796428800, 129060195264000,
              10559470521600, 670442572800, 33522128640, 1323241920, 40840800, 960960, 16380, 182, 1};
  }
}

Mat pade(const Mat& A, int m) {
  const auto c = pade_coefficients(m);
  const Eigen::Index n = A.rows();
  const Mat I = Mat::Identity(n, n);
  const Mat A2 = A * A;
  Mat U;
  Mat V;
  if (m < 13) {
    Mat even = c[0] * I;
    Mat odd = c[1] * I;
    Mat power = I;
    for (int k = 2; k <= m; k += 2) {
      power = power * A2;
      even += c[static_cast<std::size_t>(k)] * power;
      if (k + 1 <= m) odd += c[static_cast<std::size_t>(k + 1)] * power;
    }
    U = A * odd;
    V = even;
  } else {
    const Mat A4 = A2 * A2;
    const Mat A6 = A4 * A2;
    U = A * (A6 * (c[13] * A6 + c[11] * A4 + c[9] * A2) + c[7] * A6 + c[5] * A4 + c[3] * A2 + c[1] * I);
    V = A6 * (c[12] * A6 + c[10] * A4 + c[8] * A2) + c[6] * A6 + c[4] * A4 + c[2] * A2 + c[0] * I;
  }
  return (V - U).partialPivLu().solve(V + U);
}

}  // namespace

Mat expm(const Mat& A) {
  if (A.rows() != A.cols()) throw DomainError("expm: matrix must be square");
  if (!A.allFinite()) throw DomainError("expm: non-finite input");
  const double norm = A.cwiseAbs().colwise().sum().maxCoeff();
  for (std::size_t i = 0; i + 1 < kTheta.size(); ++i)
    if (norm <= kTheta[i]) return pade(A, kDegree[i]);
  int s = 0;
  if (norm > kTheta.back()) s = static_cast<int>(std::ceil(std::log2(norm / kTheta.back())));
  Mat R = pade(A / std::ldexp(1.0, s), 13);
  for (int i = 0; i < s; ++i) R = R * R;
  if (!R.allFinite()) throw DomainError("expm: result overflows");
  return R;
}

}  // namespace nlphase
