// SPDX-License-Identifier: Apache-2.0
#include "irsee/cone.hpp"

#include <ostream>
#include <stdexcept>

namespace irsee::cone {

namespace {

constexpr int kMaxEmbeddedDim = 400;
constexpr double kHermTol = 1e-10;

void check_coeffs(const std::vector<BlockSpec>& blocks, const AffineExpr& aff,
                  const char* where) {
  if (aff.coeff.size() != blocks.size())
    throw std::invalid_argument(std::string("cone: coefficient count mismatch in ") +
                                where);
  for (size_t b = 0; b < blocks.size(); ++b) {
    const MatC& c = aff.coeff[b];
    if (c.size() == 0) continue;
    if (c.rows() != blocks[b].dim || c.cols() != blocks[b].dim)
      throw std::invalid_argument(std::string("cone: coefficient shape mismatch in ") +
                                  where);
    if ((c - c.adjoint()).cwiseAbs().maxCoeff() > kHermTol * (1.0 + c.cwiseAbs().maxCoeff()))
      throw std::invalid_argument(std::string("cone: non-Hermitian coefficient in ") +
                                  where);
  }
}

void check_expr(const std::vector<BlockSpec>& blocks, const Expr& e, const char* where) {
  check_coeffs(blocks, e.affine, where);
  for (const auto& lt : e.logs) {
    if (lt.weight < 0.0)
      throw std::invalid_argument(std::string("cone: negative log weight in ") + where);
    check_coeffs(blocks, lt.arg, where);
  }
}

}  // namespace

double AffineExpr::value(const std::vector<MatC>& x) const {
  double v = offset;
  for (size_t b = 0; b < coeff.size(); ++b) {
    if (coeff[b].size() == 0) continue;
    v += (coeff[b].cwiseProduct(x[b].transpose())).sum().real();
  }
  return v;
}

double Expr::value(const std::vector<MatC>& x) const {
  double v = affine.value(x);
  for (const auto& lt : logs) v += lt.weight * std::log(lt.arg.value(x));
  return v;
}

int ConeProgram::add_block(const std::string& name, int dim) {
  blocks.push_back({name, dim});
  return static_cast<int>(blocks.size()) - 1;
}

AffineExpr ConeProgram::zero_affine() const {
  AffineExpr a;
  a.coeff.resize(blocks.size());
  return a;
}

void ConeProgram::validate() const {
  if (blocks.empty()) throw std::invalid_argument("cone: no blocks");
  for (const auto& b : blocks) {
    if (b.dim < 1) throw std::invalid_argument("cone: block dimension must be >= 1");
    if (2 * b.dim > kMaxEmbeddedDim)
      throw std::invalid_argument("cone: block exceeds the embedded-size guardrail");
  }
  check_expr(blocks, objective, "objective");
  for (const auto& c : constraints) {
    check_expr(blocks, c.expr, c.label.empty() ? "constraint" : c.label.c_str());
    if (c.sense == Sense::EqualZero && !c.expr.logs.empty())
      throw std::invalid_argument("cone: equality constraints cannot carry log terms");
  }
  for (const auto& f : fixed) {
    if (f.block < 0 || f.block >= static_cast<int>(blocks.size()))
      throw std::invalid_argument("cone: fixed entry block out of range");
    const int d = blocks[f.block].dim;
    if (f.row < 0 || f.row >= d || f.col < 0 || f.col >= d)
      throw std::invalid_argument("cone: fixed entry index out of range");
    if (f.row == f.col && std::abs(f.value.imag()) > kHermTol)
      throw std::invalid_argument("cone: fixed diagonal entry must be real");
  }
}

namespace {

void dump_affine(const std::vector<BlockSpec>& blocks, const AffineExpr& a,
                 std::ostream& os) {
  os << a.offset;
  for (size_t b = 0; b < a.coeff.size(); ++b) {
    if (a.coeff[b].size() == 0) continue;
    os << " + <" << blocks[b].name << ", ";
    if (blocks[b].dim <= 4)
      os << "[" << a.coeff[b].format(Eigen::IOFormat(6, 0, ",", ";", "", "", "", "")) << "]";
    else
      os << "coeff(|F|=" << a.coeff[b].norm() << ")";
    os << ">";
  }
}

void dump_expr(const std::vector<BlockSpec>& blocks, const Expr& e, std::ostream& os) {
  dump_affine(blocks, e.affine, os);
  for (const auto& lt : e.logs) {
    os << " + " << lt.weight << "*ln(";
    dump_affine(blocks, lt.arg, os);
    os << ")";
  }
}

}  // namespace

void ConeProgram::dump(std::ostream& os) const {
  os << "cone program: " << blocks.size() << " blocks, " << constraints.size()
     << " constraints, " << fixed.size() << " pinned entries\n";
  for (const auto& b : blocks) os << "  block " << b.name << " dim " << b.dim << "\n";
  os << "maximize ";
  dump_expr(blocks, objective, os);
  os << "\n";
  for (const auto& c : constraints) {
    os << "  s.t. [" << c.label << "] ";
    dump_expr(blocks, c.expr, os);
    os << (c.sense == Sense::EqualZero ? " == 0\n" : " >= 0\n");
  }
  for (const auto& f : fixed)
    os << "  pin " << blocks[f.block].name << "(" << f.row << "," << f.col
       << ") = " << f.value.real() << (f.value.imag() < 0 ? "-" : "+")
       << std::abs(f.value.imag()) << "i\n";
}

MatD embed_complex(const MatC& h) {
  const int d = static_cast<int>(h.rows());
  MatD e(2 * d, 2 * d);
  e.topLeftCorner(d, d) = h.real();
  e.bottomRightCorner(d, d) = h.real();
  e.topRightCorner(d, d) = -h.imag();
  e.bottomLeftCorner(d, d) = h.imag();
  return e;
}

MatC recover_hermitian(const MatD& e) {
  const int d = static_cast<int>(e.rows()) / 2;
  const MatD re = 0.5 * (e.topLeftCorner(d, d) + e.bottomRightCorner(d, d));
  const MatD im = 0.5 * (e.bottomLeftCorner(d, d) - e.topRightCorner(d, d));
  MatC h = re.cast<cxd>() + cxd(0.0, 1.0) * im.cast<cxd>();
  return 0.5 * (h + h.adjoint().eval());  // exact Hermitian symmetrization
}

RankOne rank_one_extract(const MatC& w) {
  RankOne out;
  const double tr = w.trace().real();
  if (!(tr > 1e-12)) {
    out.w = VecC::Zero(w.rows());
    out.ratio = 1.0;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<MatC> eig(0.5 * (w + w.adjoint().eval()));
  const int last = static_cast<int>(w.rows()) - 1;
  const double lmax = std::max(eig.eigenvalues()(last), 0.0);
  VecC v = eig.eigenvectors().col(last) * std::sqrt(lmax);
  int pivot = last;
  if (std::abs(v(last)) <= 1e-12 * v.norm()) {
    v.cwiseAbs().maxCoeff(&pivot);
  }
  if (std::abs(v(pivot)) > 0.0) v *= std::polar(1.0, -std::arg(v(pivot)));
  out.w = v;
  out.ratio = lmax / tr;
  return out;
}

VecC sample_from_gram(const MatC& w, std::mt19937_64& rng) {
  Eigen::SelfAdjointEigenSolver<MatC> eig(0.5 * (w + w.adjoint().eval()));
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  VecC z(w.rows());
  for (int i = 0; i < z.size(); ++i) z(i) = cxd(gauss(rng), gauss(rng));
  const VecD lam = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * lam.asDiagonal() * z;
}

}  // namespace irsee::cone
