#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "steering/matrix.hpp"
#include "steering/prob_table.hpp"

namespace steering {

// Collection of unnormalized ensemble members sigma(a,x) on Bob's space,
// indexed by Alice's outcome a < r and input x < s. Valid instances are
// member-wise PSD, no-signaling (the marginal sum_a sigma(a,x) does not
// depend on x) and carry total trace <= 1; subnormalized instances appear as
// branch images of stochastic operations.
class Assemblage {
 public:
  static constexpr double kPsdFloor = -1e-10;
  static constexpr double kNoSignalingTol = 1e-9;
  static constexpr double kTraceTol = 1e-9;

  static Assemblage build(std::size_t r, std::size_t s, std::size_t d,
                          std::vector<HermitianMatrix> members) {
    if (r < 1 || s < 1 || d < 1)
      throw DimensionError("assemblage needs r, s, d >= 1");
    if (members.size() != r * s)
      throw DimensionError("assemblage needs r*s members (x-major order)");
    for (const HermitianMatrix& m : members)
      if (m.dim() != d) throw DimensionError("member dimension mismatch");

    Assemblage a;
    a.r_ = r;
    a.s_ = s;
    a.d_ = d;
    a.members_ = std::move(members);

    for (std::size_t x = 0; x < s; ++x)
      for (std::size_t o = 0; o < r; ++o) {
        const double lam = min_eigenvalue(a.member(o, x));
        if (lam < kPsdFloor) {
          std::ostringstream msg;
          msg << "member (a=" << o << ", x=" << x
              << ") is not PSD: min eigenvalue " << lam;
          throw ValidationError(msg.str());
        }
      }

    auto [worst_x, worst_y, residual] = a.worst_signaling_pair();
    if (residual > kNoSignalingTol) {
      std::ostringstream msg;
      msg << "assemblage signals: marginals for x=" << worst_x << " and x="
          << worst_y << " differ by " << residual << " (Frobenius)";
      throw ValidationError(msg.str());
    }

    for (std::size_t x = 0; x < s; ++x) {
      double t = 0.0;
      for (std::size_t o = 0; o < r; ++o) t += a.member(o, x).trace();
      if (t > 1.0 + kTraceTol)
        throw ValidationError("assemblage trace exceeds one");
    }
    return a;
  }

  std::size_t outputs() const { return r_; }
  std::size_t inputs() const { return s_; }
  std::size_t dim() const { return d_; }

  const HermitianMatrix& member(std::size_t a, std::size_t x) const {
    if (a >= r_ || x >= s_) throw DimensionError("member index out of range");
    return members_[x * r_ + a];
  }

  double prob(std::size_t a, std::size_t x) const {
    return member(a, x).trace();
  }

  // nullopt flags the undefined normalized state of a negligible member
  std::optional<HermitianMatrix> normalized_state(std::size_t a,
                                                  std::size_t x) const {
    const double t = prob(a, x);
    if (t < 1e-12) return std::nullopt;
    return member(a, x) * (1.0 / t);
  }

  HermitianMatrix bob_marginal() const {
    HermitianMatrix m = HermitianMatrix::zero(d_);
    for (std::size_t x = 0; x < s_; ++x)
      for (std::size_t a = 0; a < r_; ++a) m += member(a, x);
    return m *= 1.0 / static_cast<double>(s_);
  }

  double trace() const { return bob_marginal().trace(); }

  double no_signaling_residual() const {
    return std::get<2>(worst_signaling_pair());
  }

  bool same_shape(const Assemblage& o) const {
    return r_ == o.r_ && s_ == o.s_ && d_ == o.d_;
  }

  // sigma(a,x) = Tr_A[(M_{a|x} (x) 1_B) rho_AB]
  static Assemblage from_state_and_measurements(
      const HermitianMatrix& rho_ab,
      const std::vector<std::vector<HermitianMatrix>>& povms,
      std::size_t dim_b) {
    if (povms.empty() || povms.front().empty())
      throw DimensionError("need at least one measurement with one outcome");
    const std::size_t s = povms.size();
    const std::size_t r = povms.front().size();
    const std::size_t da = povms.front().front().dim();
    if (rho_ab.dim() != da * dim_b)
      throw DimensionError("state dimension does not match measurements");
    if (std::abs(rho_ab.trace() - 1.0) > 1e-9)
      throw ValidationError("joint state must be normalized");

    std::vector<HermitianMatrix> members;
    for (std::size_t x = 0; x < s; ++x) {
      if (povms[x].size() != r)
        throw DimensionError("all measurements need the same outcome count");
      HermitianMatrix total = HermitianMatrix::zero(da);
      for (const HermitianMatrix& m : povms[x]) {
        if (min_eigenvalue(m) < kPsdFloor)
          throw ValidationError("measurement effect is not PSD");
        total += m;
      }
      if ((total - HermitianMatrix::identity(da)).frobenius() > 1e-10)
        throw ValidationError("measurement effects do not sum to identity");

      for (std::size_t a = 0; a < r; ++a) {
        const HermitianMatrix& m = povms[x][a];
        CMatrix sig(dim_b, dim_b);
        for (std::size_t ib = 0; ib < dim_b; ++ib)
          for (std::size_t jb = 0; jb < dim_b; ++jb) {
            cplx acc = 0.0;
            for (std::size_t ia = 0; ia < da; ++ia)
              for (std::size_t ka = 0; ka < da; ++ka)
                acc += m(ia, ka) * rho_ab(ka * dim_b + ib, ia * dim_b + jb);
            sig(ib, jb) = acc;
          }
        members.push_back(HermitianMatrix::symmetrized(sig));
      }
    }
    return build(r, s, dim_b, std::move(members));
  }

  static Assemblage mix(const Assemblage& a, const Assemblage& b, double mu) {
    if (!a.same_shape(b)) throw DimensionError("mixing needs equal shapes");
    if (mu < 0.0 || mu > 1.0)
      throw ValidationError("mixing weight must lie in [0, 1]");
    std::vector<HermitianMatrix> members;
    for (std::size_t x = 0; x < a.s_; ++x)
      for (std::size_t o = 0; o < a.r_; ++o)
        members.push_back(mu * a.member(o, x) + (1.0 - mu) * b.member(o, x));
    return build(a.r_, a.s_, a.d_, std::move(members));
  }

  // canonical steerable fixture: maximally entangled pair, Alice measuring
  // the Z (x=0) and X (x=1) bases; Bob's members are the matching basis
  // projectors at weight 1/2
  static Assemblage singlet_xz() {
    auto m = [](double a00, double a01, double a11) {
      HermitianMatrix h(2);
      h.set(0, 0, a00);
      h.set(0, 1, a01);
      h.set(1, 1, a11);
      return h;
    };
    return build(2, 2, 2,
                 {m(0.5, 0.0, 0.0), m(0.0, 0.0, 0.5), m(0.25, 0.25, 0.25),
                  m(0.25, -0.25, 0.25)});
  }

  static Assemblage white_noise(std::size_t r, std::size_t s, std::size_t d) {
    std::vector<HermitianMatrix> members(
        r * s, HermitianMatrix::identity(d) *
                   (1.0 / static_cast<double>(r * d)));
    return build(r, s, d, std::move(members));
  }

 private:
  std::tuple<std::size_t, std::size_t, double> worst_signaling_pair() const {
    std::vector<HermitianMatrix> marg;
    for (std::size_t x = 0; x < s_; ++x) {
      HermitianMatrix m = HermitianMatrix::zero(d_);
      for (std::size_t a = 0; a < r_; ++a) m += member(a, x);
      marg.push_back(m);
    }
    std::size_t wx = 0, wy = 0;
    double worst = 0.0;
    for (std::size_t x = 0; x < s_; ++x)
      for (std::size_t y = x + 1; y < s_; ++y) {
        const double res = (marg[x] - marg[y]).frobenius();
        if (res > worst) {
          worst = res;
          wx = x;
          wy = y;
        }
      }
    return {wx, wy, worst};
  }

  std::size_t r_ = 0, s_ = 0, d_ = 0;
  std::vector<HermitianMatrix> members_;  // x-major: members_[x*r + a]
};

// Flag-register form: per input x the block operator sum_a |a><a| (x)
// sigma(a,x) on a space of dimension r*d.
struct QuantumRepresentation {
  std::size_t r = 0, s = 0, d = 0;
  std::vector<HermitianMatrix> per_input;

  static QuantumRepresentation from(const Assemblage& ass) {
    QuantumRepresentation q;
    q.r = ass.outputs();
    q.s = ass.inputs();
    q.d = ass.dim();
    for (std::size_t x = 0; x < q.s; ++x) {
      CMatrix block(q.r * q.d, q.r * q.d);
      for (std::size_t a = 0; a < q.r; ++a) {
        const HermitianMatrix& m = ass.member(a, x);
        for (std::size_t i = 0; i < q.d; ++i)
          for (std::size_t j = 0; j < q.d; ++j)
            block(a * q.d + i, a * q.d + j) = m(i, j);
      }
      q.per_input.push_back(HermitianMatrix::symmetrized(block));
    }
    return q;
  }
};

// Assemblage whose members are weighted rank-1 projectors. Zero-weight
// members keep a placeholder unit vector.
struct PureAssemblage {
  std::size_t r = 0, s = 0, d = 0;
  std::vector<double> weights;             // x-major, P(a|x)
  std::vector<std::vector<cplx>> states;   // x-major unit vectors

  double weight(std::size_t a, std::size_t x) const {
    return weights[x * r + a];
  }
  const std::vector<cplx>& state(std::size_t a, std::size_t x) const {
    return states[x * r + a];
  }

  Assemblage to_assemblage() const {
    std::vector<HermitianMatrix> members;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      HermitianMatrix p = projector_of(states[k]);
      members.push_back(p *= weights[k]);
    }
    return Assemblage::build(r, s, d, std::move(members));
  }

  static PureAssemblage from(const Assemblage& ass, double tol = 1e-10) {
    PureAssemblage p;
    p.r = ass.outputs();
    p.s = ass.inputs();
    p.d = ass.dim();
    for (std::size_t x = 0; x < p.s; ++x)
      for (std::size_t a = 0; a < p.r; ++a) {
        const HermitianMatrix& m = ass.member(a, x);
        const double t = m.trace();
        if (t < 1e-12) {
          p.weights.push_back(0.0);
          std::vector<cplx> e(p.d, 0.0);
          e[0] = 1.0;
          p.states.push_back(std::move(e));
          continue;
        }
        Spectrum spec = eig_hermitian(m);
        std::vector<cplx> v(p.d);
        for (std::size_t i = 0; i < p.d; ++i)
          v[i] = spec.vectors(i, p.d - 1);
        HermitianMatrix rank1 = projector_of(v);
        rank1 *= t;
        if ((m - rank1).frobenius() > tol)
          throw ValidationError("member is not rank one within tolerance");
        p.weights.push_back(t);
        p.states.push_back(std::move(v));
      }
    return p;
  }

 private:
  static HermitianMatrix projector_of(const std::vector<cplx>& v) {
    CMatrix m(v.size(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j)
        m(i, j) = v[i] * std::conj(v[j]);
    return HermitianMatrix::symmetrized(m);
  }
};

}  // namespace steering
