#include "ama/prox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ama {

namespace {

void check_bounds(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("box: bound sizes differ");
  for (Index j = 0; j < a.size(); ++j) {
    if (!(a[j] <= b[j])) throw std::invalid_argument("box: requires a <= b componentwise");
  }
}

}  // namespace

double ProxOracle::conjugate_value(const Vec&) const {
  throw std::logic_error("ProxOracle: no closed-form conjugate for kind " + kind());
}

// ---------------------------------------------------------------- box

BoxIndicator::BoxIndicator(Vec a, Vec b) : a_(std::move(a)), b_(std::move(b)) {
  check_bounds(a_, b_);
}

void BoxIndicator::prox(const Vec& v, double /*lambda*/, Vec& out) const {
  out = v.cwiseMax(a_).cwiseMin(b_);
}

double BoxIndicator::value(const Vec& z) const {
  for (Index j = 0; j < z.size(); ++j) {
    const double scale = 1.0 + std::min(std::abs(z[j]), 1e300);
    if (z[j] > b_[j] + 1e-9 * scale || z[j] < a_[j] - 1e-9 * scale) return kInf;
  }
  return 0.0;
}

double BoxIndicator::conjugate_value(const Vec& y) const {
  // Support function of [a, b]; infinite bounds make the domain a cone slice.
  const double tol = 1e-13 * (1.0 + y.cwiseAbs().maxCoeff());
  double s = 0.0;
  for (Index j = 0; j < y.size(); ++j) {
    if (y[j] > tol) {
      if (!std::isfinite(b_[j])) return kInf;
      s += b_[j] * y[j];
    } else if (y[j] < -tol) {
      if (!std::isfinite(a_[j])) return kInf;
      s += a_[j] * y[j];
    } else {
      if (y[j] > 0.0 && std::isfinite(b_[j])) s += b_[j] * y[j];
      if (y[j] < 0.0 && std::isfinite(a_[j])) s += a_[j] * y[j];
    }
  }
  return s;
}

std::shared_ptr<const ProxOracle> BoxIndicator::rescaled(const Vec& d) const {
  return std::make_shared<BoxIndicator>(d.cwiseProduct(a_), d.cwiseProduct(b_));
}

std::shared_ptr<const ProxOracle> make_orthant_nonpositive(Index dim) {
  return std::make_shared<BoxIndicator>(Vec::Constant(dim, -kInf), Vec::Zero(dim));
}

// ---------------------------------------------------------------- soft box

SoftBox::SoftBox(Vec a, Vec b, Vec alpha)
    : a_(std::move(a)), b_(std::move(b)), alpha_(std::move(alpha)) {
  check_bounds(a_, b_);
  if (alpha_.size() != a_.size()) throw std::invalid_argument("softbox: weight size differs");
  if (!a_.allFinite() || !b_.allFinite())
    throw std::invalid_argument("softbox: bounds must be finite");
  if (!(alpha_.array() > 0.0).all() || !alpha_.allFinite())
    throw std::invalid_argument("softbox: weights must be positive");
}

void SoftBox::prox(const Vec& v, double lambda, Vec& out) const {
  out.resize(v.size());
  for (Index j = 0; j < v.size(); ++j) {
    const double shrink = lambda * alpha_[j];
    if (v[j] > b_[j]) {
      out[j] = std::max(b_[j], v[j] - shrink);
    } else if (v[j] < a_[j]) {
      out[j] = std::min(a_[j], v[j] + shrink);
    } else {
      out[j] = v[j];
    }
  }
}

double SoftBox::value(const Vec& z) const {
  double s = 0.0;
  for (Index j = 0; j < z.size(); ++j) {
    s += alpha_[j] * (std::max(z[j] - b_[j], 0.0) + std::max(a_[j] - z[j], 0.0));
  }
  return s;
}

double SoftBox::conjugate_value(const Vec& y) const {
  // sigma_[a,b](y) restricted to |y_j| <= alpha_j.
  double s = 0.0;
  for (Index j = 0; j < y.size(); ++j) {
    const double tol = 1e-12 * (1.0 + alpha_[j]);
    if (std::abs(y[j]) > alpha_[j] + tol) return kInf;
    s += (y[j] > 0.0 ? b_[j] : a_[j]) * y[j];
  }
  return s;
}

std::shared_ptr<const ProxOracle> SoftBox::rescaled(const Vec& d) const {
  return std::make_shared<SoftBox>(d.cwiseProduct(a_), d.cwiseProduct(b_),
                                   alpha_.cwiseQuotient(d));
}

// ---------------------------------------------------------------- ball

BallIndicator::BallIndicator(Index dim, double radius) : dim_(dim), r_(radius) {
  if (!(r_ > 0.0) || !std::isfinite(r_))
    throw std::invalid_argument("ball: radius must be positive and finite");
}

void BallIndicator::prox(const Vec& v, double /*lambda*/, Vec& out) const {
  const double n = v.norm();
  out = (n <= r_) ? v : Vec((r_ / n) * v);
}

double BallIndicator::value(const Vec& z) const {
  return z.norm() <= r_ * (1.0 + 1e-9) ? 0.0 : kInf;
}

std::shared_ptr<const ProxOracle> BallIndicator::rescaled(const Vec& d) const {
  const double c = d[0];
  if (((d.array() - c).abs() > 1e-12 * c).any())
    throw std::invalid_argument("ball: rescaling requires a uniform weight over the block");
  return std::make_shared<BallIndicator>(dim_, c * r_);
}

// ---------------------------------------------------------------- scaled distance

ScaledDistance::ScaledDistance(Vec a, Vec b, double alpha)
    : a_(std::move(a)), b_(std::move(b)), alpha_(alpha) {
  check_bounds(a_, b_);
  if (!a_.allFinite() || !b_.allFinite())
    throw std::invalid_argument("scaleddist: bounds must be finite");
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_))
    throw std::invalid_argument("scaleddist: weight must be positive");
}

void ScaledDistance::prox(const Vec& v, double lambda, Vec& out) const {
  Vec p = v.cwiseMax(a_).cwiseMin(b_);
  const double dist = (v - p).norm();
  const double step = lambda * alpha_;
  if (dist <= step) {
    out = std::move(p);
  } else {
    out = v + (step / dist) * (p - v);
  }
}

double ScaledDistance::value(const Vec& z) const {
  return alpha_ * (z - z.cwiseMax(a_).cwiseMin(b_)).norm();
}

double ScaledDistance::conjugate_value(const Vec& y) const {
  if (y.norm() > alpha_ * (1.0 + 1e-12)) return kInf;
  double s = 0.0;
  for (Index j = 0; j < y.size(); ++j) s += (y[j] > 0.0 ? b_[j] : a_[j]) * y[j];
  return s;
}

std::shared_ptr<const ProxOracle> ScaledDistance::rescaled(const Vec& d) const {
  const double c = d[0];
  if (((d.array() - c).abs() > 1e-12 * c).any())
    throw std::invalid_argument("scaleddist: rescaling requires a uniform weight over the block");
  return std::make_shared<ScaledDistance>(c * a_, c * b_, alpha_ / c);
}

// ---------------------------------------------------------------- block sum

BlockSum::BlockSum(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
  Index expect = 0;
  for (const Block& blk : blocks_) {
    if (!blk.g) throw std::invalid_argument("blocksum: null oracle");
    if (blk.offset != expect)
      throw std::invalid_argument("blocksum: blocks must partition [0, dim) contiguously");
    expect += blk.g->dim();
  }
  dim_ = expect;
  if (dim_ == 0) throw std::invalid_argument("blocksum: empty");
}

void BlockSum::prox(const Vec& v, double lambda, Vec& out) const {
  out.resize(dim_);
  Vec sub, subout;
  for (const Block& blk : blocks_) {
    sub = v.segment(blk.offset, blk.g->dim());
    blk.g->prox(sub, lambda, subout);
    out.segment(blk.offset, blk.g->dim()) = subout;
  }
}

double BlockSum::value(const Vec& z) const {
  double s = 0.0;
  for (const Block& blk : blocks_) {
    const double v = blk.g->value(z.segment(blk.offset, blk.g->dim()));
    if (!std::isfinite(v)) return kInf;
    s += v;
  }
  return s;
}

bool BlockSum::has_conjugate() const {
  return std::all_of(blocks_.begin(), blocks_.end(),
                     [](const Block& b) { return b.g->has_conjugate(); });
}

double BlockSum::conjugate_value(const Vec& y) const {
  double s = 0.0;
  for (const Block& blk : blocks_) {
    const double v = blk.g->conjugate_value(y.segment(blk.offset, blk.g->dim()));
    if (!std::isfinite(v)) return kInf;
    s += v;
  }
  return s;
}

bool BlockSum::separable() const {
  return std::all_of(blocks_.begin(), blocks_.end(),
                     [](const Block& b) { return b.g->separable(); });
}

std::shared_ptr<const ProxOracle> BlockSum::rescaled(const Vec& d) const {
  std::vector<Block> out;
  out.reserve(blocks_.size());
  for (const Block& blk : blocks_) {
    out.push_back({blk.offset, blk.g->rescaled(d.segment(blk.offset, blk.g->dim()))});
  }
  return std::make_shared<BlockSum>(std::move(out));
}

// ---------------------------------------------------------------- conjugates

Vec prox_conjugate(const ProxOracle& g, const Vec& v, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("prox_conjugate: lambda must be positive");
  return v - lambda * g.prox(v / lambda, 1.0 / lambda);
}

double conjugate_moreau_env(const ProxOracle& g, const Vec& v, double gamma) {
  const Vec u = prox_conjugate(g, v, gamma);
  const double gu = g.conjugate_value(u);
  if (!std::isfinite(gu)) return gu;
  return gu + (u - v).squaredNorm() / (2.0 * gamma);
}

}  // namespace ama
