#include "homsteer/induced.hpp"

#include "homsteer/errors.hpp"

namespace homsteer {

FeatureMap::FeatureMap(RepPtr rep, Matrix values) : rep_(std::move(rep)), values_(std::move(values)) {
  if (!rep_) throw InvalidRepresentation("feature map without representation");
  if (values_.rows() != rep_->dim() || values_.cols() != rep_->group().order()) {
    throw DimensionMismatch("feature values must be dim(rho) x |G|, got " +
                            std::to_string(values_.rows()) + " x " +
                            std::to_string(values_.cols()));
  }
}

FeatureMap FeatureMap::zeros(RepPtr rep) {
  const int d = rep->dim(), n = rep->group().order();
  return FeatureMap(std::move(rep), Matrix::Zero(d, n));
}

double FeatureMap::mackey_residual() const {
  const auto& G = group();
  double worst = 0.0;
  for (Element g = 0; g < G.order(); ++g) {
    for (Element h : subgroup().elements()) {
      const Vector expected = (*rep_)(G.inv(h)) * values_.col(g);
      worst = std::max(worst, (values_.col(G.mul(g, h)) - expected).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

SectionFeature::SectionFeature(QuotientPtr quotient, RepPtr rep, Matrix values)
    : quotient_(std::move(quotient)), rep_(std::move(rep)), values_(std::move(values)) {
  if (!quotient_ || !rep_) throw InvalidRepresentation("section feature needs quotient and rep");
  if (quotient_->subgroup().elements() != rep_->domain().elements()) {
    throw DimensionMismatch("quotient subgroup differs from the representation's domain");
  }
  if (values_.rows() != rep_->dim() || values_.cols() != quotient_->size()) {
    throw DimensionMismatch("section values must be dim(rho) x |G/H|");
  }
}

FeatureMap mackey_project(const Matrix& raw, RepPtr rep) {
  const auto& G = rep->group();
  if (raw.rows() != rep->dim() || raw.cols() != G.order()) {
    throw DimensionMismatch("raw feature must be dim(rho) x |G|");
  }
  const auto& hs = rep->domain().elements();
  Matrix out = Matrix::Zero(raw.rows(), raw.cols());
  for (Element g = 0; g < G.order(); ++g) {
    for (Element h : hs) out.col(g) += (*rep)(h) * raw.col(G.mul(g, h));
  }
  out /= static_cast<double>(hs.size());
  return FeatureMap(std::move(rep), std::move(out));
}

FeatureMap g_action(Element k, const FeatureMap& f) {
  const auto& G = f.group();
  const Element k_inv = G.inv(k);
  Matrix out(f.values().rows(), f.values().cols());
  for (Element g = 0; g < G.order(); ++g) out.col(g) = f.values().col(G.mul(k_inv, g));
  return FeatureMap(f.rep_ptr(), std::move(out));
}

FeatureMap lift(const SectionFeature& sf) {
  const auto& q = sf.quotient();
  const auto& G = q.group();
  Matrix out(sf.dim(), G.order());
  for (Element g = 0; g < G.order(); ++g) {
    out.col(g) = sf.rep()(G.inv(q.fibre(g))) * sf.values().col(q.coset_of(g));
  }
  return FeatureMap(sf.rep_ptr(), std::move(out));
}

SectionFeature sink(const FeatureMap& f, QuotientPtr quotient) {
  if (quotient->subgroup().elements() != f.subgroup().elements()) {
    throw DimensionMismatch("quotient subgroup differs from the feature's subgroup");
  }
  const double res = f.mackey_residual();
  if (res > kMackeyRejectTolerance) {
    throw NotInduced("feature map is not in the induced representation (residual " +
                         std::to_string(res) + ")",
                     res);
  }
  Matrix out(f.dim(), quotient->size());
  for (CosetIndex x = 0; x < quotient->size(); ++x) out.col(x) = f.values().col(quotient->section(x));
  return SectionFeature(std::move(quotient), f.rep_ptr(), std::move(out));
}

SectionFeature section_action(Element k, const SectionFeature& sf) {
  const auto& q = sf.quotient();
  const auto& G = q.group();
  const Element k_inv = G.inv(k);
  Matrix out(sf.dim(), q.size());
  for (CosetIndex x = 0; x < q.size(); ++x) {
    const Element h = q.twist(x, k_inv);
    out.col(x) = sf.rep()(G.inv(h)) * sf.values().col(q.act(k_inv, x));
  }
  return SectionFeature(sf.quotient_ptr(), sf.rep_ptr(), std::move(out));
}

FeatureMap random_feature(RepPtr rep, std::mt19937_64& rng) {
  const int n = rep->group().order();
  const Matrix raw = random_uniform(rep->dim(), n, rng);
  return mackey_project(raw, std::move(rep));
}

SectionFeature random_section_feature(QuotientPtr quotient, RepPtr rep, std::mt19937_64& rng) {
  Matrix values = random_uniform(rep->dim(), quotient->size(), rng);
  return SectionFeature(std::move(quotient), std::move(rep), std::move(values));
}

double max_abs_diff(const FeatureMap& a, const FeatureMap& b) {
  if (a.values().rows() != b.values().rows() || a.values().cols() != b.values().cols()) {
    throw DimensionMismatch("feature maps have different shapes");
  }
  return max_abs(a.values() - b.values());
}

double max_abs_diff(const SectionFeature& a, const SectionFeature& b) {
  if (a.values().rows() != b.values().rows() || a.values().cols() != b.values().cols()) {
    throw DimensionMismatch("section features have different shapes");
  }
  return max_abs(a.values() - b.values());
}

}  // namespace homsteer
