#include <doctest.h>

#include "ama/problem.hpp"
#include "oracles.hpp"

using namespace ama;

TEST_CASE("operator norm: identity and diagonal") {
  DenseMap I3(Mat::Identity(3, 3));
  auto e1 = operator_norm(I3);
  CHECK(e1.converged);
  CHECK(e1.value == doctest::Approx(1.0).epsilon(1e-9));

  Mat D = Mat::Zero(2, 2);
  D(0, 0) = 3.0;
  D(1, 1) = 1.0;
  auto e2 = operator_norm(DenseMap(D));
  CHECK(e2.value == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("operator norm matches dense SVD on a random 5x7 map") {
  Rng rng(7);
  Mat A = Mat::NullaryExpr(5, 7, [&](Index, Index) { return rng.normal(); });
  const double ref = oracle::svd_norm(A);
  auto est = operator_norm(DenseMap(A), 1e-12, 5000);
  CHECK(est.converged);
  CHECK(std::abs(est.value - ref) <= 1e-8 * ref);
}

TEST_CASE("operator norm is invariant under adjoint") {
  Rng rng(11);
  Mat A = Mat::NullaryExpr(6, 4, [&](Index, Index) { return rng.normal(); });
  auto inner = std::make_shared<DenseMap>(A);
  const double tol = 1e-9;
  auto direct = operator_norm(*inner, tol, 2000);
  auto adj = operator_norm(AdjointMap(inner), tol, 2000);
  CHECK(std::abs(direct.value - adj.value) <= 2.0 * tol * direct.value);
}

TEST_CASE("adjoint consistency <Ax,y> = <x,A'y> on random pairs") {
  Rng rng(3);
  std::vector<std::shared_ptr<const LinearMap>> maps;
  Mat D = Mat::NullaryExpr(5, 4, [&](Index, Index) { return rng.normal(); });
  maps.push_back(std::make_shared<DenseMap>(D));
  std::vector<Mat> blocks = {Mat::NullaryExpr(2, 3, [&](Index, Index) { return rng.normal(); }),
                             Mat::NullaryExpr(3, 2, [&](Index, Index) { return rng.normal(); })};
  auto bd = std::make_shared<BlockDiagMap>(blocks);
  maps.push_back(bd);
  Vec d = Vec::NullaryExpr(bd->rows(), [&](Index) { return rng.uniform(0.2, 2.0); });
  maps.push_back(std::make_shared<RowScaledMap>(bd, d));

  for (const auto& map : maps) {
    const double normA = oracle::svd_norm(map->dense());
    for (int trial = 0; trial < 100; ++trial) {
      Vec x = Vec::NullaryExpr(map->cols(), [&](Index) { return rng.normal(); });
      Vec y = Vec::NullaryExpr(map->rows(), [&](Index) { return rng.normal(); });
      const double lhs = map->apply(x).dot(y);
      const double rhs = x.dot(map->applyAdjoint(y));
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + x.norm() * normA * y.norm()));
    }
  }
}

TEST_CASE("block-diagonal apply equals dense assembly") {
  Rng rng(5);
  std::vector<Mat> blocks = {Mat::NullaryExpr(2, 4, [&](Index, Index) { return rng.normal(); }),
                             Mat::NullaryExpr(1, 2, [&](Index, Index) { return rng.normal(); }),
                             Mat::NullaryExpr(3, 3, [&](Index, Index) { return rng.normal(); })};
  BlockDiagMap bd(blocks);
  const Mat dense = bd.dense();
  CHECK(bd.rows() == 6);
  CHECK(bd.cols() == 9);
  for (int t = 0; t < 20; ++t) {
    Vec x = Vec::NullaryExpr(9, [&](Index) { return rng.normal(); });
    CHECK((bd.apply(x) - dense * x).cwiseAbs().maxCoeff() <= 1e-14);
    Vec y = Vec::NullaryExpr(6, [&](Index) { return rng.normal(); });
    CHECK((bd.applyAdjoint(y) - dense.transpose() * y).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("non-convergent power iteration reports a flag") {
  Mat A = Mat::Identity(4, 4);
  A(0, 0) = 1.0 + 1e-13;  // nearly degenerate spectrum
  auto est = operator_norm(DenseMap(A), 1e-16, 3);
  CHECK(!est.converged);
  CHECK(est.value > 0.9);
}

TEST_CASE("jacobi scaling: identity quadratic gives unit weights") {
  Problem p;
  p.f = std::make_shared<QuadraticOracle>(Mat::Identity(2, 2), Vec::Zero(2));
  p.g = std::make_shared<BoxIndicator>(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
  p.A = std::make_shared<DenseMap>(Mat::Identity(2, 2));
  const DiagonalScaling s = jacobi_scaling(p);
  CHECK((s.d - Vec::Ones(2)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("jacobi scaling: H = diag(1,4) gives d = (1,2)") {
  Mat H = Mat::Zero(2, 2);
  H(0, 0) = 1.0;
  H(1, 1) = 4.0;
  Problem p;
  p.f = std::make_shared<QuadraticOracle>(H, Vec::Zero(2));
  p.g = std::make_shared<BoxIndicator>(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
  p.A = std::make_shared<DenseMap>(Mat::Identity(2, 2));
  const DiagonalScaling s = jacobi_scaling(p);
  CHECK(s.d[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.d[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("jacobi scaling normalizes the dual Hessian diagonal") {
  Rng rng(17);
  for (int rep = 0; rep < 5; ++rep) {
    auto qp = oracle::random_box_qp(rng, 6, 8);
    const DiagonalScaling s = jacobi_scaling(qp.problem);
    const ScaledProblem sp = scale_problem(qp.problem, s);
    const Mat Hd = oracle::dual_hessian_dense(sp.problem);
    for (Index i = 0; i < Hd.rows(); ++i) {
      CHECK(Hd(i, i) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("jacobi scaling rejects flat rows") {
  // Rank-deficient map: second dual row sees no curvature.
  Mat A = Mat::Zero(2, 1);
  A(0, 0) = 1.0;
  Problem p;
  p.f = std::make_shared<QuadraticOracle>(Mat::Identity(1, 1), Vec::Zero(1));
  p.g = std::make_shared<BoxIndicator>(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
  p.A = std::make_shared<DenseMap>(A);
  CHECK_THROWS_AS(jacobi_scaling(p), std::runtime_error);
}

TEST_CASE("dual_lipschitz matches the dense dual Hessian norm") {
  Rng rng(23);
  auto qp = oracle::random_box_qp(rng, 5, 7);
  const Mat Hd = oracle::dual_hessian_dense(qp.problem);
  const double ref = oracle::svd_norm(Hd);
  auto est = dual_lipschitz(qp.problem, 1e-12, 5000);
  CHECK(est.converged);
  CHECK(est.value == doctest::Approx(ref).epsilon(1e-8));
}
