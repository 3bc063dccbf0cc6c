// SPDX-License-Identifier: Apache-2.0
#include "symtensor/charge_system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "symtensor/su2.hpp"

namespace symtensor {

bool ChargeSystem::fusible(Charge a, Charge b, Charge c) const {
  const auto out = fuse(a, b);
  return std::binary_search(out.begin(), out.end(), c);
}

namespace {

class Su2System final : public ChargeSystem {
 public:
  const std::string& name() const override {
    static const std::string n = "su2";
    return n;
  }
  bool valid(Charge c) const override { return c >= 0; }
  Charge trivial() const override { return 0; }
  Charge dual(Charge c) const override { return c; }
  int dim(Charge c) const override { return c + 1; }

  std::vector<Charge> fuse(Charge a, Charge b) const override {
    std::vector<Charge> out;
    for (Charge c = std::abs(a - b); c <= a + b; c += 2) out.push_back(c);
    return out;
  }

  double f_coeff(Charge a, Charge b, Charge c, Charge d, Charge e,
                 Charge f) const override {
    return recoupling_f(Spin(a), Spin(b), Spin(c), Spin(d), Spin(e), Spin(f));
  }

  double r_coeff(Charge a, Charge b, Charge c) const override {
    return swap_r(Spin(a), Spin(b), Spin(c));
  }

  double conj_node_factor(Charge a, Charge b, Charge c) const override {
    // kappa = (-1)^{2(ja+jb)} sqrt((2jc+1) / ((2ja+1)(2jb+1)))
    const double sign = ((a + b) % 2 == 0) ? 1.0 : -1.0;
    return sign * std::sqrt(static_cast<double>(c + 1) /
                            (static_cast<double>(a + 1) * (b + 1)));
  }

  double frobenius_schur(Charge c) const override { return (c % 2 == 0) ? 1.0 : -1.0; }

  Eigen::MatrixXd leg_intertwiner(Charge c) const override {
    return static_cast<double>(dim(c)) * omega(Spin(c));
  }
};

class U1System final : public ChargeSystem {
 public:
  const std::string& name() const override {
    static const std::string n = "u1";
    return n;
  }
  bool valid(Charge) const override { return true; }
  Charge trivial() const override { return 0; }
  Charge dual(Charge c) const override { return -c; }
  int dim(Charge) const override { return 1; }

  std::vector<Charge> fuse(Charge a, Charge b) const override { return {a + b}; }

  double f_coeff(Charge a, Charge b, Charge c, Charge d, Charge e,
                 Charge f) const override {
    return (e == a + b && f == b + c && d == a + b + c) ? 1.0 : 0.0;
  }

  double r_coeff(Charge, Charge, Charge) const override { return 1.0; }
  double conj_node_factor(Charge, Charge, Charge) const override { return 1.0; }
  double frobenius_schur(Charge) const override { return 1.0; }
  Eigen::MatrixXd leg_intertwiner(Charge) const override {
    return Eigen::MatrixXd::Ones(1, 1);
  }
};

class Z2FermionSystem final : public ChargeSystem {
 public:
  const std::string& name() const override {
    static const std::string n = "z2f";
    return n;
  }
  bool valid(Charge c) const override { return c == 0 || c == 1; }
  Charge trivial() const override { return 0; }
  Charge dual(Charge c) const override { return c; }
  int dim(Charge) const override { return 1; }

  std::vector<Charge> fuse(Charge a, Charge b) const override { return {(a + b) % 2}; }

  double f_coeff(Charge a, Charge b, Charge c, Charge d, Charge e,
                 Charge f) const override {
    return (e == (a + b) % 2 && f == (b + c) % 2 && d == (a + b + c) % 2) ? 1.0 : 0.0;
  }

  double r_coeff(Charge a, Charge b, Charge c) const override {
    if (c != (a + b) % 2) throw std::invalid_argument("z2f r_coeff: bad fusion triple");
    return (a == 1 && b == 1) ? -1.0 : 1.0;
  }

  double conj_node_factor(Charge, Charge, Charge) const override { return 1.0; }
  double frobenius_schur(Charge) const override { return 1.0; }
  Eigen::MatrixXd leg_intertwiner(Charge) const override {
    return Eigen::MatrixXd::Ones(1, 1);
  }
};

}  // namespace

ChargeSystemPtr su2_system() {
  static const auto instance = std::make_shared<const Su2System>();
  return instance;
}

ChargeSystemPtr u1_system() {
  static const auto instance = std::make_shared<const U1System>();
  return instance;
}

ChargeSystemPtr z2_fermion_system() {
  static const auto instance = std::make_shared<const Z2FermionSystem>();
  return instance;
}

ChargeSystemPtr charge_system_by_name(const std::string& name) {
  if (name == "su2") return su2_system();
  if (name == "u1") return u1_system();
  if (name == "z2f") return z2_fermion_system();
  throw std::invalid_argument("unknown charge system: " + name);
}

}  // namespace symtensor
