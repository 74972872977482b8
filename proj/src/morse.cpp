#include "nirenberg/morse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nirenberg {
namespace morse {

namespace {

struct FieldData {
  SpectralField K;
  SpectralField lapK;
  std::array<SpectralField, 3> grad;                 // ambient components of grad K
  std::array<std::array<SpectralField, 3>, 3> hess;  // hess[i][j] = (grad grad_i)_j
  double grad_scale = 0.0;
  double c2_norm = 0.0;
  double knorm_inf = 0.0;

  Vec3 grad_at(const Vec3& p) const {
    double q[3] = {p.x(), p.y(), p.z()};
    return Vec3(sht::eval_dir(grad[0], q), sht::eval_dir(grad[1], q), sht::eval_dir(grad[2], q));
  }
  Eigen::Matrix3d hess_at(const Vec3& p) const {
    double q[3] = {p.x(), p.y(), p.z()};
    Eigen::Matrix3d B;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) B(i, j) = sht::eval_dir(hess[i][j], q);
    return B;
  }
};

// Orthonormal tangent frame at p.
void tangent_frame(const Vec3& p, Vec3& e1, Vec3& e2) {
  Vec3 a = (std::abs(p.z()) < 0.9) ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
  e1 = (a - a.dot(p) * p).normalized();
  e2 = p.cross(e1);
}

FieldData build_field_data(const SpectralField& K, const SphereGrid& g) {
  FieldData fd;
  fd.K = K;
  fd.lapK = ops::laplacian(K);
  fd.grad = ops::gradient_field(K, g);
  // Second-derivative fields live on a grid that resolves band lmax + 2.
  SphereGrid g2 = (g.capacity() >= K.lmax + 3) ? g : SphereGrid::make(K.lmax + 3, 2.0);
  for (int i = 0; i < 3; ++i) fd.hess[i] = ops::gradient_field(fd.grad[i], g2);

  GridField gsq = ops::gradient_sq(K, g);
  fd.grad_scale = std::sqrt(std::max(gsq.max(), 0.0));
  fd.knorm_inf = ops::norm_inf(K, g);
  fd.c2_norm = fd.knorm_inf + fd.grad_scale + ops::norm_inf(fd.lapK, g);
  return fd;
}

// Newton polish of grad K = 0 in the tangent plane at the current iterate,
// accepting only steps that reduce |grad K| (halving otherwise). The step
// clamp keeps iterates inside the basin the candidate was scanned in.
bool polish(const FieldData& fd, Vec3& p, double tol_abs, double clamp, int max_iter = 60) {
  double gnorm = fd.grad_at(p).norm();
  for (int it = 0; it < max_iter; ++it) {
    if (gnorm < tol_abs) return true;
    Eigen::Matrix3d B = fd.hess_at(p);
    Vec3 e1, e2;
    tangent_frame(p, e1, e2);
    Eigen::Matrix2d J;
    J(0, 0) = e1.dot(B * e1);
    J(0, 1) = 0.5 * (e1.dot(B * e2) + e2.dot(B * e1));
    J(1, 0) = J(0, 1);
    J(1, 1) = e2.dot(B * e2);
    Vec3 grad = fd.grad_at(p);
    Eigen::Vector2d rhs(-grad.dot(e1), -grad.dot(e2));
    Eigen::Vector2d step = J.fullPivLu().solve(rhs);
    double len = step.norm();
    if (!std::isfinite(len)) return false;
    if (len > clamp) step *= clamp / len;
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 8; ++ls) {
      Vec3 cand = (p + alpha * (step.x() * e1 + step.y() * e2)).normalized();
      double gn = fd.grad_at(cand).norm();
      if (gn < gnorm) {
        p = cand;
        gnorm = gn;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) return gnorm < tol_abs;
  }
  return gnorm < tol_abs;
}

CriticalPoint classify_point(const FieldData& fd, const Vec3& p, const Tolerances& tol) {
  CriticalPoint cp;
  cp.location = p;
  double q[3] = {p.x(), p.y(), p.z()};
  cp.value = sht::eval_dir(fd.K, q);
  cp.grad_norm = fd.grad_at(p).norm();
  cp.lap = sht::eval_dir(fd.lapK, q);

  Eigen::Matrix3d B = fd.hess_at(p);
  Vec3 e1, e2;
  tangent_frame(p, e1, e2);
  Eigen::Matrix2d H;
  H(0, 0) = e1.dot(B * e1);
  H(0, 1) = 0.5 * (e1.dot(B * e2) + e2.dot(B * e1));
  H(1, 0) = H(0, 1);
  H(1, 1) = e2.dot(B * e2);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(H);
  cp.hess_eig[0] = es.eigenvalues()(0);
  cp.hess_eig[1] = es.eigenvalues()(1);

  double det = cp.hess_eig[0] * cp.hess_eig[1];
  double degen_threshold = tol.degenerate_rel * fd.c2_norm * fd.c2_norm;
  if (std::abs(det) < degen_threshold)
    cp.type = CritType::degenerate;
  else if (det < 0)
    cp.type = CritType::saddle;
  else
    cp.type = (cp.hess_eig[1] < 0) ? CritType::maximum : CritType::minimum;
  return cp;
}

}  // namespace

std::vector<CriticalPoint> find_critical_points(const SpectralField& K, const SphereGrid& g,
                                                const Tolerances& tol) {
  double variation = 0.0;
  for (int l = 1; l <= K.lmax; ++l)
    for (int m = -l; m <= l; ++m) variation += K.at(l, m) * K.at(l, m);
  if (std::sqrt(variation) < 1e-12 * (1.0 + std::abs(K.mean())))
    throw Error(Errc::constant_input, "field has no critical structure");

  FieldData fd = build_field_data(K, g);
  double tol_abs = tol.grad_rel * fd.grad_scale;

  // Coarse scan well above the band limit for local minima of |grad K|^2;
  // 6x in each direction separates close critical pairs in practice.
  SphereGrid scan = SphereGrid::make(std::max(3 * K.lmax, 8), 2.0);
  GridField gx = sht::synthesize(fd.grad[0], scan);
  GridField gy = sht::synthesize(fd.grad[1], scan);
  GridField gz = sht::synthesize(fd.grad[2], scan);
  GridField gsq(scan.nlat, scan.nlon);
  for (size_t i = 0; i < gsq.v.size(); ++i)
    gsq.v[i] = gx.v[i] * gx.v[i] + gy.v[i] * gy.v[i] + gz.v[i] * gz.v[i];

  GridField Kv = sht::synthesize(K, scan);

  std::vector<Vec3> candidates;
  auto wrap = [&](int k) { return (k % scan.nlon + scan.nlon) % scan.nlon; };
  auto gsq_at = [&](int j, int k) { return gsq.at(j, wrap(k)); };
  auto k_at = [&](int j, int k) { return Kv.at(j, wrap(k)); };
  for (int j = 0; j < scan.nlat; ++j)
    for (int k = 0; k < scan.nlon; ++k) {
      bool grad_min = true, k_min = true, k_max = true;
      double cg = gsq.at(j, k), cv = Kv.at(j, k);
      for (int dj = -1; dj <= 1; ++dj)
        for (int dk = -1; dk <= 1; ++dk) {
          if (dj == 0 && dk == 0) continue;
          int jj = j + dj;
          if (jj < 0 || jj >= scan.nlat) continue;
          if (gsq_at(jj, k + dk) < cg) grad_min = false;
          if (k_at(jj, k + dk) < cv) k_min = false;
          if (k_at(jj, k + dk) > cv) k_max = false;
        }
      if (grad_min || k_min || k_max) {
        double p[3];
        scan.node(j, k, p);
        candidates.emplace_back(p[0], p[1], p[2]);
      }
    }
  candidates.emplace_back(0, 0, 1);
  candidates.emplace_back(0, 0, -1);

  // Polish in parallel, dedup sequentially in candidate order so the result
  // does not depend on thread scheduling.
  const double clamp = 2.0 * std::numbers::pi / scan.nlat;
  std::vector<std::pair<bool, Vec3>> polished(candidates.size());
#pragma omp parallel for schedule(dynamic)
  for (size_t ci = 0; ci < candidates.size(); ++ci) {
    Vec3 p = candidates[ci];
    bool ok = polish(fd, p, tol_abs, clamp);
    polished[ci] = {ok, p};
  }
  std::vector<CriticalPoint> accepted;
  for (const auto& [ok, p] : polished) {
    if (!ok) continue;
    bool dup = false;
    for (auto& prev : accepted) {
      double ang = std::acos(std::clamp(prev.location.dot(p), -1.0, 1.0));
      if (ang < tol.dedup_radius) {
        dup = true;
        break;
      }
    }
    if (!dup) accepted.push_back(classify_point(fd, p, tol));
  }
  std::sort(accepted.begin(), accepted.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.location.z() > b.location.z();
  });
  return accepted;
}

MorseReport classify_regions(const SpectralField& K, const SphereGrid& g, const Tolerances& tol) {
  MorseReport rep;
  rep.points = find_critical_points(K, g, tol);
  rep.knorm_inf = ops::norm_inf(K, g);
  rep.eps_c = tol.eps_c_rel * rep.knorm_inf;
  GridField gsq = ops::gradient_sq(K, g);
  double grad_scale = std::sqrt(std::max(gsq.max(), 0.0));
  rep.grad_tol = tol.grad_rel * grad_scale;
  rep.eps_n = tol.eps_n_rel * rep.knorm_inf;

  rep.positivity = sht::synthesize(K, g).max() > rep.eps_c;

  rep.is_morse = true;
  rep.in_c = true;
  rep.in_n = true;
  for (size_t i = 0; i < rep.points.size(); ++i) {
    const CriticalPoint& cp = rep.points[i];
    switch (cp.type) {
      case CritType::maximum: ++rep.n_max; break;
      case CritType::minimum: ++rep.n_min; break;
      case CritType::saddle: ++rep.n_saddle; break;
      case CritType::degenerate:
        ++rep.n_degenerate;
        rep.is_morse = false;
        break;
    }
    if (cp.type == CritType::maximum) {
      if (std::abs(cp.value) <= rep.eps_c) {
        rep.in_c = false;
        rep.boundary_c = true;
        rep.c_witnesses.push_back(static_cast<int>(i));
      }
      if (cp.value > rep.eps_c) ++rep.m_pos;
    }
    if (cp.value > rep.eps_c) {
      if (std::abs(cp.lap) <= rep.eps_n) {
        rep.in_n = false;
        rep.boundary_n = true;
        rep.n_witnesses.push_back(static_cast<int>(i));
      }
      if (cp.type == CritType::saddle) {
        if (cp.lap > rep.eps_n) ++rep.s_plus;
        if (cp.lap < -rep.eps_n) ++rep.s_minus;
      }
    }
  }

  if (rep.in_c && rep.in_n && rep.is_morse && rep.positivity)
    rep.degree = rep.m_pos - rep.s_minus - 1;
  return rep;
}

int degree(const MorseReport& rep) {
  if (!rep.degree.has_value())
    throw Error(Errc::undefined_degree, "degree needs a Morse field inside both regions with K > 0 somewhere");
  // Independent route: signed index sum over {grad K = 0, Lap K < 0, K > 0}.
  int signed_sum = 0;
  for (const auto& cp : rep.points) {
    if (cp.value > rep.eps_c && cp.lap < -rep.eps_n) {
      signed_sum += (cp.type == CritType::saddle) ? -1 : 1;
    }
  }
  int via_counts = *rep.degree;
  if (signed_sum - 1 != via_counts)
    throw Error(Errc::internal_inconsistency, "degree formulas disagree: " + std::to_string(via_counts) +
                                                  " vs " + std::to_string(signed_sum - 1));
  return via_counts;
}

nlohmann::json report_to_json(const MorseReport& rep) {
  nlohmann::json j;
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& cp : rep.points) {
    nlohmann::json p;
    p["location"] = {cp.location.x(), cp.location.y(), cp.location.z()};
    p["value"] = cp.value;
    p["grad_norm"] = cp.grad_norm;
    p["hessian_eigenvalues"] = {cp.hess_eig[0], cp.hess_eig[1]};
    p["type"] = crit_type_name(cp.type);
    p["laplacian"] = cp.lap;
    pts.push_back(p);
  }
  j["critical_points"] = pts;
  j["counts"] = {{"max", rep.n_max},
                 {"min", rep.n_min},
                 {"saddle", rep.n_saddle},
                 {"degenerate", rep.n_degenerate},
                 {"positive_max", rep.m_pos},
                 {"saddle_pos_lap_plus", rep.s_plus},
                 {"saddle_pos_lap_minus", rep.s_minus}};
  j["positivity"] = rep.positivity;
  j["in_C"] = rep.in_c;
  j["in_N"] = rep.in_n;
  j["boundary_C"] = rep.boundary_c;
  j["boundary_N"] = rep.boundary_n;
  j["is_morse"] = rep.is_morse;
  if (rep.degree.has_value())
    j["degree"] = *rep.degree;
  else
    j["degree"] = "undefined";
  j["tolerances"] = {{"eps_c", rep.eps_c}, {"eps_n", rep.eps_n}, {"grad_tol", rep.grad_tol}};
  return j;
}

}  // namespace morse
}  // namespace nirenberg
