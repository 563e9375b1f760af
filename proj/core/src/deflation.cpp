#include "sfpca/deflation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <sstream>

namespace sfpca {

std::string scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::hotelling: return "hotelling";
    case SchemeKind::projection: return "projection";
    case SchemeKind::schur: return "schur";
  }
  return "unknown";
}

DeflationState DeflationState::init(DenseMatrix x) {
  if (!x.allFinite()) throw numeric_error("deflation: input matrix has non-finite entries");
  DeflationState s;
  s.x_original = x;
  s.x_current = std::move(x);
  return s;
}

namespace {

constexpr double kGramConditionBound = 1e10;

// (B^T B)^{-1} via Cholesky with an explicit condition bound; `name` feeds the
// error message so the offending factor is identifiable.
Eigen::MatrixXd gram_inverse(const DenseMatrix& b, const std::string& name) {
  const Eigen::MatrixXd gram = b.transpose() * b;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw numeric_error("deflation: eigendecomposition of " + name + " failed");
  }
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (lo <= 0.0 || hi / lo > kGramConditionBound) {
    throw conditioning_error("deflation: Gram matrix " + name +
                             " is ill-conditioned (condition " +
                             std::to_string(lo > 0.0 ? hi / lo : INFINITY) + ")");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw conditioning_error("deflation: Cholesky of " + name + " failed");
  }
  return llt.solve(Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
}

DeflationState append_step(const DeflationState& state, DenseMatrix u,
                           DenseMatrix v, SchemeKind kind, DenseMatrix x_next) {
  DeflationState out = state;
  out.x_current = x_next;
  out.history.push_back(DeflationStep{std::move(u), std::move(v), kind,
                                      std::move(x_next)});
  return out;
}

}  // namespace

DeflationState deflate_vector(const DeflationState& state, const Vector& u_in,
                              const Vector& v_in, DeflationScheme scheme) {
  const DenseMatrix& x = state.x_current;
  if (u_in.size() != x.rows() || v_in.size() != x.cols()) {
    throw dimension_error("deflate_vector: factor lengths do not match the matrix");
  }
  if (u_in.norm() == 0.0 || v_in.norm() == 0.0) {
    throw degenerate_error("deflate_vector: zero factor");
  }

  Vector u = u_in, v = v_in;
  if (scheme.normalize && scheme.kind != SchemeKind::schur) {
    u /= u.norm();
    v /= v.norm();
  }

  const Vector xv = x * v;
  const Vector xtu = x.transpose() * u;
  const double pivot = u.dot(xv);

  DenseMatrix next;
  switch (scheme.kind) {
    case SchemeKind::hotelling:
      next = x - pivot * (u * v.transpose());
      break;
    case SchemeKind::projection:
      // (I - u u^T) X (I - v v^T), expanded to avoid forming projectors.
      next = x - u * xtu.transpose() - xv * v.transpose() +
             pivot * (u * v.transpose());
      break;
    case SchemeKind::schur:
      if (std::abs(pivot) < 1e-12 * x.norm()) {
        throw conditioning_error("deflate_vector: Schur pivot u^T X v = " +
                                 std::to_string(pivot) +
                                 " is numerically singular");
      }
      next = x - (xv * xtu.transpose()) / pivot;
      break;
  }
  return append_step(state, u, v, scheme.kind, std::move(next));
}

DeflationState deflate_block(const DeflationState& state, const DenseMatrix& u,
                             const DenseMatrix& v, DeflationScheme scheme) {
  const DenseMatrix& x = state.x_current;
  if (u.rows() != x.rows() || v.rows() != x.cols() || u.cols() != v.cols()) {
    throw dimension_error("deflate_block: block shapes do not match the matrix");
  }

  DenseMatrix next;
  switch (scheme.kind) {
    case SchemeKind::hotelling: {
      const Eigen::MatrixXd gu = gram_inverse(u, "U^T U");
      const Eigen::MatrixXd gv = gram_inverse(v, "V^T V");
      next = x - u * (gu * (u.transpose() * x * v) * gv) * v.transpose();
      break;
    }
    case SchemeKind::projection: {
      const Eigen::MatrixXd gu = gram_inverse(u, "U^T U");
      const Eigen::MatrixXd gv = gram_inverse(v, "V^T V");
      const DenseMatrix left = x - u * (gu * (u.transpose() * x));
      next = left - (left * v) * gv * v.transpose();
      break;
    }
    case SchemeKind::schur: {
      const Eigen::MatrixXd pivot = u.transpose() * x * v;
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(pivot);
      const double rcond = lu.rcond();
      if (!(rcond > 0.0) || 1.0 / rcond > kGramConditionBound) {
        throw conditioning_error(
            "deflate_block: Schur pivot U^T X V is ill-conditioned (condition " +
            std::to_string(rcond > 0.0 ? 1.0 / rcond : INFINITY) + ")");
      }
      next = x - (x * v) * lu.solve(Eigen::MatrixXd(u.transpose() * x));
      break;
    }
  }
  return append_step(state, u, v, scheme.kind, std::move(next));
}

OrthogonalityReport orthogonality_report(const DeflationState& state) {
  if (state.history.empty()) {
    throw dimension_error("orthogonality_report: empty deflation history");
  }
  OrthogonalityReport report;
  report.x0_norm = state.x_original.norm();
  const int steps = static_cast<int>(state.history.size());
  for (int t = 0; t < steps; ++t) {
    const DeflationStep& removed = state.history[t];
    for (int later = t; later < steps; ++later) {
      const DenseMatrix& xl = state.history[later].x_after;
      OrthogonalityEntry e;
      e.step = t + 1;
      e.lag = later - t;
      e.kind = removed.kind;
      e.one_way_left = (removed.u.transpose() * xl).norm();
      e.one_way_right = (xl * removed.v).norm();
      e.two_way = (removed.u.transpose() * xl * removed.v).norm();
      report.max_one_way =
          std::max({report.max_one_way, e.one_way_left, e.one_way_right});
      report.max_two_way = std::max(report.max_two_way, e.two_way);
      report.entries.push_back(e);
    }
  }
  return report;
}

std::string OrthogonalityReport::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\n  \"x0_norm\": " << x0_norm
     << ",\n  \"max_one_way\": " << max_one_way
     << ",\n  \"max_two_way\": " << max_two_way << ",\n  \"entries\": [\n";
  for (size_t i = 0; i < entries.size(); ++i) {
    const OrthogonalityEntry& e = entries[i];
    os << "    {\"step\": " << e.step << ", \"lag\": " << e.lag
       << ", \"scheme\": \"" << scheme_name(e.kind) << "\""
       << ", \"one_way_left\": " << e.one_way_left
       << ", \"one_way_right\": " << e.one_way_right
       << ", \"two_way\": " << e.two_way << "}"
       << (i + 1 < entries.size() ? "," : "") << "\n";
  }
  os << "  ]\n}\n";
  return os.str();
}

}  // namespace sfpca
