#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "chantop/embed.hpp"

namespace chantop::embed {

PcaResult pca_points(const double* x, std::size_t n, std::size_t d,
                     std::size_t k) {
  if (n == 0 || d == 0) throw std::invalid_argument("empty matrix");
  if (k < 1 || k > d)
    throw std::invalid_argument(
        "component count must lie between 1 and the column count");

  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  Eigen::Map<const MatrixXd> raw(x, static_cast<Eigen::Index>(d),
                                 static_cast<Eigen::Index>(n));
  // Map reads column-major, so transpose the row-major input.
  MatrixXd a = raw.transpose();
  VectorXd mean = a.colwise().mean();
  a.rowwise() -= mean.transpose();

  Eigen::BDCSVD<MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  MatrixXd v = svd.matrixV();

  const auto r = sv.size();
  double total = sv.array().square().sum();

  PcaResult out;
  out.d = d;
  out.k = k;
  out.mean.assign(mean.data(), mean.data() + d);
  out.components.assign(k * d, 0.0);
  out.explained_variance_ratio.assign(k, 0.0);

  // Deterministic orientation: largest-magnitude loading points up.
  for (Eigen::Index c = 0; c < r; ++c) {
    Eigen::Index at = 0;
    v.col(c).cwiseAbs().maxCoeff(&at);
    if (v(at, c) < 0.0) v.col(c) = -v.col(c);
  }

  for (std::size_t c = 0; c < k; ++c) {
    if (static_cast<Eigen::Index>(c) < r) {
      for (std::size_t j = 0; j < d; ++j)
        out.components[c * d + j] = v(static_cast<Eigen::Index>(j),
                                      static_cast<Eigen::Index>(c));
      if (total > 0.0)
        out.explained_variance_ratio[c] =
            sv(static_cast<Eigen::Index>(c)) * sv(static_cast<Eigen::Index>(c)) /
            total;
    }
  }

  MatrixXd comp(d, k);
  comp.setZero();
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < d; ++j)
      comp(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) =
          out.components[c * d + j];
  MatrixXd scores = a * comp;

  out.scores.assign(n * k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c)
      out.scores[i * k + c] = scores(static_cast<Eigen::Index>(i),
                                     static_cast<Eigen::Index>(c));

  out.embedding.n = n;
  out.embedding.method = EmbedMethod::Pca;
  out.embedding.coords.assign(2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.embedding.coords[2 * i] = out.scores[i * k];
    if (k > 1) out.embedding.coords[2 * i + 1] = out.scores[i * k + 1];
  }
  double cumulative = 0.0;
  for (std::size_t c = 0; c < k; ++c)
    cumulative += out.explained_variance_ratio[c];
  out.embedding.final_objective = cumulative;
  return out;
}

PcaResult pca(const normalize::FeatureMatrix& m, std::size_t k) {
  return pca_points(m.values.data(), m.rows, m.cols, k);
}

}  // namespace chantop::embed
