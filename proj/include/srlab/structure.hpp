// The rank-2 structure family on R^3: frames X1 = d/dx1 and
// X2 = phi d/dx2 + psi d/dx3, with the polynomial family
// phi = 1, psi = (x1^a - x2^b)^c and three classical named examples.
#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <string>

#include "srlab/errors.hpp"
#include "srlab/numeric.hpp"

namespace srlab {

enum class StructureKind { polynomial, heisenberg, martinet, liu_sussmann };

inline const char* to_string(StructureKind k) {
  switch (k) {
    case StructureKind::polynomial: return "polynomial";
    case StructureKind::heisenberg: return "heisenberg";
    case StructureKind::martinet: return "martinet";
    case StructureKind::liu_sussmann: return "liu_sussmann";
  }
  return "?";
}

struct Vec3 {
  double x1 = 0.0, x2 = 0.0, x3 = 0.0;
};

// phi, psi and their x1-partials at a point (the quadruple most operations
// need).
struct FieldValues {
  double phi = 0.0;
  double psi = 0.0;
  double dphi_dx1 = 0.0;
  double dpsi_dx1 = 0.0;
};

// Full first-order data for the Hamiltonian flow; x3-partials are zero for
// every built-in kind but kept explicit so the flow code reads like the
// equations.
struct FieldDerivs {
  double phi = 0.0;
  double psi = 0.0;
  std::array<double, 3> dphi = {0.0, 0.0, 0.0};
  std::array<double, 3> dpsi = {0.0, 0.0, 0.0};
};

class StructureDef {
 public:
  static StructureDef polynomial(int a, int b, int c = 2) {
    if (a < 1 || b < 1 || c < 1)
      throw domain_error("polynomial structure requires a, b, c >= 1");
    if (a > 24 || b > 24 || c > 12)
      throw domain_error(
          "polynomial exponents capped at a,b <= 24, c <= 12 (binomial "
          "coefficients and powers stay exactly representable)");
    StructureDef s;
    s.kind_ = StructureKind::polynomial;
    s.a_ = a;
    s.b_ = b;
    s.c_ = c;
    const int g = std::gcd(a, b);
    s.q_num_ = std::max(a, b) / g;
    s.q_den_ = std::min(a, b) / g;
    return s;
  }
  static StructureDef heisenberg() { return named(StructureKind::heisenberg); }
  static StructureDef martinet() { return named(StructureKind::martinet); }
  static StructureDef liu_sussmann() {
    return named(StructureKind::liu_sussmann);
  }

  StructureKind kind() const { return kind_; }
  bool is_polynomial() const { return kind_ == StructureKind::polynomial; }

  int a() const { return require_poly("a"), a_; }
  int b() const { return require_poly("b"), b_; }
  int c() const { return require_poly("c"), c_; }

  // q = max{a,b}/min{a,b}, cached as a reduced fraction.
  double q() const { return require_poly("q"), double(q_num_) / double(q_den_); }
  int q_num() const { return require_poly("q"), q_num_; }
  int q_den() const { return require_poly("q"), q_den_; }

 private:
  static StructureDef named(StructureKind k) {
    StructureDef s;
    s.kind_ = k;
    return s;
  }
  void require_poly(const char* what) const {
    if (!is_polynomial())
      throw unsupported_structure_error(
          std::string(what) + " is defined only for the polynomial kind (got " +
          to_string(kind_) + ")");
  }

  StructureKind kind_ = StructureKind::polynomial;
  int a_ = 1, b_ = 1, c_ = 2;
  int q_num_ = 1, q_den_ = 1;
};

// P(x1, x2) = x1^a - x2^b.
inline double eval_P(double x1, double x2, const StructureDef& s) {
  if (!s.is_polynomial())
    throw unsupported_structure_error("eval_P requires the polynomial kind");
  return powi(x1, s.a()) - powi(x2, s.b());
}

// phi, psi, and their x1-partials at x.
inline FieldValues eval_fields(const Vec3& x, const StructureDef& s) {
  switch (s.kind()) {
    case StructureKind::heisenberg:
      return {1.0, x.x1, 0.0, 1.0};
    case StructureKind::martinet:
      return {1.0, x.x1 * x.x1, 0.0, 2.0 * x.x1};
    case StructureKind::liu_sussmann:
      return {1.0 - x.x1, x.x1 * x.x1, -1.0, 2.0 * x.x1};
    case StructureKind::polynomial: {
      const double P = eval_P(x.x1, x.x2, s);
      const double psi = powi(P, s.c());
      const double dpsi = s.c() * s.a() * powi(x.x1, s.a() - 1) *
                          powi(P, s.c() - 1);
      return {1.0, psi, 0.0, dpsi};
    }
  }
  return {};
}

// All first-order field data (for the normal flow).
inline FieldDerivs eval_field_derivs(const Vec3& x, const StructureDef& s) {
  FieldDerivs d;
  switch (s.kind()) {
    case StructureKind::heisenberg:
      d.phi = 1.0;
      d.psi = x.x1;
      d.dpsi = {1.0, 0.0, 0.0};
      return d;
    case StructureKind::martinet:
      d.phi = 1.0;
      d.psi = x.x1 * x.x1;
      d.dpsi = {2.0 * x.x1, 0.0, 0.0};
      return d;
    case StructureKind::liu_sussmann:
      d.phi = 1.0 - x.x1;
      d.dphi = {-1.0, 0.0, 0.0};
      d.psi = x.x1 * x.x1;
      d.dpsi = {2.0 * x.x1, 0.0, 0.0};
      return d;
    case StructureKind::polynomial: {
      const double P = eval_P(x.x1, x.x2, s);
      const double Pc1 = powi(P, s.c() - 1);
      d.phi = 1.0;
      d.psi = Pc1 * P;
      d.dpsi = {s.c() * s.a() * powi(x.x1, s.a() - 1) * Pc1,
                -s.c() * s.b() * powi(x.x2, s.b() - 1) * Pc1, 0.0};
      return d;
    }
  }
  return d;
}

namespace detail {

inline void require_polynomial(const StructureDef& s, const char* who) {
  if (!s.is_polynomial())
    throw unsupported_structure_error(std::string(who) +
                                      " requires the polynomial structure");
}

}  // namespace detail

// Q = d(psi)/dx1 = c a x1^{a-1} P^{c-1}; the weight of the third-coordinate
// area identity, and the polynomial whose zero set carries the singular
// curves of this family.
inline double abnormal_Q(double x1, double x2, const StructureDef& s) {
  if (!s.is_polynomial())
    throw unsupported_structure_error(
        "abnormal_Q requires the polynomial kind");
  return s.c() * s.a() * powi(x1, s.a() - 1) *
         powi(eval_P(x1, x2, s), s.c() - 1);
}

// phi psi_x1 - psi phi_x1; a horizontal curve is singular exactly when this
// vanishes along it.
inline double martinet_residual(const Vec3& x, const StructureDef& s) {
  const FieldValues f = eval_fields(x, s);
  return f.phi * f.dpsi_dx1 - f.psi * f.dphi_dx1;
}

}  // namespace srlab
