#include "nirenberg/curvature.hpp"

#include <cmath>

namespace nirenberg {
namespace curvature {

ConformalMetric::ConformalMetric(const SpectralField& u_in, const SphereGrid& g)
    : u(u_in), e2u(ops::exp_field(u_in, g, 2.0)) {
  area = ops::integrate(e2u, g);
}

SpectralField gauss_curvature(const SpectralField& u, const SphereGrid& g, double tail_tol) {
  GridField em2u = ops::exp_field(u, g, -2.0);
  GridField lap_u = sht::synthesize(ops::laplacian(u), g);
  GridField K(g.nlat, g.nlon);
  for (size_t i = 0; i < K.v.size(); ++i) K.v[i] = em2u.v[i] * (1.0 - lap_u.v[i]);
  auto pr = ops::project_with_tail(K, g, u.lmax);
  if (pr.tail_fraction > tail_tol)
    throw Error(Errc::resolution_exceeded, "curvature tail fraction " + std::to_string(pr.tail_fraction));
  return pr.field;
}

double gauss_bonnet_defect(const SpectralField& u, const SpectralField& K, const SphereGrid& g) {
  GridField e2u = ops::exp_field(u, g, 2.0);
  GridField Kv = sht::synthesize(K, g);
  for (size_t i = 0; i < e2u.v.size(); ++i) e2u.v[i] *= Kv.v[i];
  return ops::integrate(e2u, g) - kFourPi;
}

double gauss_bonnet_defect(const SpectralField& u, const SphereGrid& g) {
  return gauss_bonnet_defect(u, gauss_curvature(u, g), g);
}

SpectralField linearization_apply(const SpectralField& u, const SpectralField& K, const SpectralField& v,
                                  const SphereGrid& g) {
  GridField em2u = ops::exp_field(u, g, -2.0);
  GridField lap_v = sht::synthesize(ops::laplacian(v), g);
  GridField Kv = sht::synthesize(K, g);
  GridField vv = sht::synthesize(v, g);
  GridField out(g.nlat, g.nlon);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = -em2u.v[i] * lap_v.v[i] - 2.0 * Kv.v[i] * vv.v[i];
  return sht::analyze(out, g, v.lmax);
}

FunctionalState functional_J(const SpectralField& u, const SpectralField& K, const SphereGrid& g) {
  GridField e2u = ops::exp_field(u, g, 2.0);
  GridField Kv = sht::synthesize(K, g);
  GridField Ke2u(g.nlat, g.nlon);
  for (size_t i = 0; i < Ke2u.v.size(); ++i) Ke2u.v[i] = Kv.v[i] * e2u.v[i];
  double mass = ops::integrate(Ke2u, g) / kFourPi;
  if (!(mass > 0.0)) throw Error(Errc::nonpositive_mass, "integral K exp(2u) dv0 = " + std::to_string(mass));

  FunctionalState st;
  st.kappa = 1.0 / mass;

  // Dirichlet term by Parseval: integral |du|^2 dv = sum l(l+1) c^2.
  double dirichlet = 0.0;
  for (int l = 1; l <= u.lmax; ++l)
    for (int m = -l; m <= l; ++m) dirichlet += l * (l + 1.0) * u.at(l, m) * u.at(l, m);
  st.value = dirichlet / kFourPi + 2.0 * u.integral() / kFourPi - std::log(mass);

  GridField grad_pt(g.nlat, g.nlon);
  for (size_t i = 0; i < grad_pt.v.size(); ++i) grad_pt.v[i] = 1.0 - st.kappa * Ke2u.v[i];
  st.gradient = sht::analyze(grad_pt, g, u.lmax);
  SpectralField lap_u = ops::laplacian(u);
  st.gradient -= lap_u;
  return st;
}

double hessian_quadratic_form(const SpectralField& u, const SpectralField& K, const SpectralField& v,
                              const SphereGrid& g) {
  double dirichlet = 0.0;
  for (int l = 1; l <= v.lmax; ++l)
    for (int m = -l; m <= l; ++m) dirichlet += l * (l + 1.0) * v.at(l, m) * v.at(l, m);
  GridField e2u = ops::exp_field(u, g, 2.0);
  GridField Kv = sht::synthesize(K, g);
  GridField vv = sht::synthesize(v, g);
  GridField w(g.nlat, g.nlon);
  for (size_t i = 0; i < w.v.size(); ++i) w.v[i] = Kv.v[i] * e2u.v[i] * vv.v[i] * vv.v[i];
  return dirichlet - 2.0 * ops::integrate(w, g);
}

BifurcationForm bifurcation_form(const SpectralField& u, const SpectralField& K,
                                 const std::vector<SpectralField>& kernel_basis, const SphereGrid& g) {
  if (kernel_basis.empty()) throw Error(Errc::not_a_singular_point, "empty kernel basis");
  const int d = static_cast<int>(kernel_basis.size());

  GridField e2u = ops::exp_field(u, g, 2.0);
  GridField Kv = sht::synthesize(K, g);
  std::vector<GridField> wv;
  wv.reserve(d);
  for (const auto& w : kernel_basis) wv.push_back(sht::synthesize(w, g));

  BifurcationForm out;
  out.forms.reserve(d);
  for (int t = 0; t < d; ++t) {
    Eigen::MatrixXd S(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        GridField integrand(g.nlat, g.nlon);
        for (size_t i = 0; i < integrand.v.size(); ++i)
          integrand.v[i] = Kv.v[i] * wv[a].v[i] * wv[b].v[i] * wv[t].v[i] * e2u.v[i];
        S(a, b) = S(b, a) = ops::integrate(integrand, g);
      }
    out.forms.push_back(S);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.eigenvalues().cwiseAbs().minCoeff() > 1e-10 * std::max(1.0, S.cwiseAbs().maxCoeff()))
      out.nondegenerate = true;
  }

  if (d == 1) {
    // 12 integral w^2 |dw|^2_g dv_g: the conformal weights cancel, leaving
    // the round-measure integral.
    GridField gsq = ops::gradient_sq(kernel_basis[0], g);
    GridField integrand(g.nlat, g.nlon);
    for (size_t i = 0; i < integrand.v.size(); ++i)
      integrand.v[i] = wv[0].v[i] * wv[0].v[i] * gsq.v[i];
    out.cubic_coefficient = 12.0 * ops::integrate(integrand, g);
  }
  return out;
}

}  // namespace curvature
}  // namespace nirenberg
