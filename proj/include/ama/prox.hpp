#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ama/types.hpp"

namespace ama {

/// Proximable term g, evaluated blockwise on R^dim. Oracles are immutable and
/// pure. value() may return +inf (indicator outside its set); callers
/// short-circuit arithmetic on non-finite values.
class ProxOracle {
 public:
  virtual ~ProxOracle() = default;

  virtual Index dim() const = 0;

  /// out = prox_{lambda g}(v), lambda > 0. Indicator kinds ignore lambda.
  virtual void prox(const Vec& v, double lambda, Vec& out) const = 0;
  Vec prox(const Vec& v, double lambda) const {
    Vec out(dim());
    prox(v, lambda, out);
    return out;
  }

  virtual double value(const Vec& z) const = 0;

  /// Closed-form conjugate g*(y) where available (enables exact dual-cost
  /// diagnostics and the Moreau-envelope evaluation path).
  virtual bool has_conjugate() const { return false; }
  virtual double conjugate_value(const Vec& /*y*/) const;

  /// True when g acts componentwise (a diagonal change of variable stays in
  /// the catalog with per-coordinate parameters).
  virtual bool separable() const = 0;

  virtual std::string kind() const = 0;

  /// Oracle for z |-> g(D^{-1} z), d > 0 of length dim(). Non-separable kinds
  /// require a uniform d over the block.
  virtual std::shared_ptr<const ProxOracle> rescaled(const Vec& d) const = 0;
};

/// Indicator of the box [a, b]; entries of a may be -inf and of b +inf, which
/// also covers orthant/halfspace indicators per coordinate.
class BoxIndicator final : public ProxOracle {
 public:
  using ProxOracle::prox;
  BoxIndicator(Vec a, Vec b);

  Index dim() const override { return a_.size(); }
  void prox(const Vec& v, double lambda, Vec& out) const override;
  double value(const Vec& z) const override;
  bool has_conjugate() const override { return true; }
  double conjugate_value(const Vec& y) const override;  // support function
  bool separable() const override { return true; }
  std::string kind() const override { return "box"; }
  std::shared_ptr<const ProxOracle> rescaled(const Vec& d) const override;

  const Vec& lower() const { return a_; }
  const Vec& upper() const { return b_; }

 private:
  Vec a_, b_;
};

/// Indicator of the nonpositive orthant {z <= 0}.
std::shared_ptr<const ProxOracle> make_orthant_nonpositive(Index dim);

/// Soft box: g(z) = sum_j alpha_j |z_j - clamp(z_j, a_j, b_j)|, the
/// separable linear penalty on box violation used for soft constraints.
class SoftBox final : public ProxOracle {
 public:
  using ProxOracle::prox;
  SoftBox(Vec a, Vec b, Vec alpha);

  Index dim() const override { return a_.size(); }
  void prox(const Vec& v, double lambda, Vec& out) const override;
  double value(const Vec& z) const override;
  bool has_conjugate() const override { return true; }
  double conjugate_value(const Vec& y) const override;
  bool separable() const override { return true; }
  std::string kind() const override { return "softbox"; }
  std::shared_ptr<const ProxOracle> rescaled(const Vec& d) const override;

  const Vec& lower() const { return a_; }
  const Vec& upper() const { return b_; }
  const Vec& weights() const { return alpha_; }

 private:
  Vec a_, b_, alpha_;
};

/// Indicator of the Euclidean ball of radius r centered at the origin.
class BallIndicator final : public ProxOracle {
 public:
  using ProxOracle::prox;
  BallIndicator(Index dim, double radius);

  Index dim() const override { return dim_; }
  void prox(const Vec& v, double lambda, Vec& out) const override;
  double value(const Vec& z) const override;
  bool has_conjugate() const override { return true; }
  double conjugate_value(const Vec& y) const override { return r_ * y.norm(); }
  bool separable() const override { return false; }
  std::string kind() const override { return "ball"; }
  std::shared_ptr<const ProxOracle> rescaled(const Vec& d) const override;

  double radius() const { return r_; }

 private:
  Index dim_;
  double r_;
};

/// Scaled Euclidean distance to a (finite) box: g(z) = alpha * dist_2(z, [a,b]).
class ScaledDistance final : public ProxOracle {
 public:
  using ProxOracle::prox;
  ScaledDistance(Vec a, Vec b, double alpha);

  Index dim() const override { return a_.size(); }
  void prox(const Vec& v, double lambda, Vec& out) const override;
  double value(const Vec& z) const override;
  bool has_conjugate() const override { return true; }
  double conjugate_value(const Vec& y) const override;
  bool separable() const override { return false; }
  std::string kind() const override { return "scaleddist"; }
  std::shared_ptr<const ProxOracle> rescaled(const Vec& d) const override;

  const Vec& lower() const { return a_; }
  const Vec& upper() const { return b_; }
  double weight() const { return alpha_; }

 private:
  Vec a_, b_;
  double alpha_;
};

/// g(z) = sum_i g_i(z_i) acting on contiguous blocks that partition [0, dim).
class BlockSum final : public ProxOracle {
 public:
  using ProxOracle::prox;
  struct Block {
    Index offset;
    std::shared_ptr<const ProxOracle> g;
  };

  explicit BlockSum(std::vector<Block> blocks);

  Index dim() const override { return dim_; }
  void prox(const Vec& v, double lambda, Vec& out) const override;
  double value(const Vec& z) const override;
  bool has_conjugate() const override;
  double conjugate_value(const Vec& y) const override;
  bool separable() const override;
  std::string kind() const override { return "blocksum"; }
  std::shared_ptr<const ProxOracle> rescaled(const Vec& d) const override;

  const std::vector<Block>& blocks() const { return blocks_; }

 private:
  std::vector<Block> blocks_;
  Index dim_ = 0;
};

/// prox_{lambda g*}(v) = v - lambda prox_{g/lambda}(v/lambda) (Moreau identity).
Vec prox_conjugate(const ProxOracle& g, const Vec& v, double lambda);

/// Moreau envelope of the conjugate, (g*)^gamma(v); requires a closed-form g*.
double conjugate_moreau_env(const ProxOracle& g, const Vec& v, double gamma);

}  // namespace ama
