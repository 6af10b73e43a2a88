// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "starmm/classic.hpp"
#include "starmm/config.hpp"
#include "starmm/error.hpp"
#include "starmm/kernels.hpp"
#include "starmm/matrix.hpp"
#include "starmm/metrics.hpp"
#include "starmm/ops.hpp"
#include "starmm/runtime.hpp"
#include "starmm/semiring.hpp"

// Strassen schedules. Entry points overwrite C with A*B and need a ring.
namespace starmm {

namespace strassen_table {

// Quadrant indices: 0 = 00, 1 = 01, 2 = 10, 3 = 11.
struct Operand {
  int x;          // first quadrant
  int y;          // second quadrant, -1 when the operand is a bare quadrant
  bool subtract;  // x - y instead of x + y
  bool bare() const { return y < 0; }
};

inline constexpr std::array<Operand, 7> S = {{
    {0, 3, false},  // S1 = A00 + A11
    {2, 3, false},  // S2 = A10 + A11
    {0, -1, false},  // S3 = A00
    {3, -1, false},  // S4 = A11
    {0, 1, false},  // S5 = A00 + A01
    {2, 0, true},   // S6 = A10 - A00
    {1, 3, true},   // S7 = A01 - A11
}};

inline constexpr std::array<Operand, 7> T = {{
    {0, 3, false},  // T1 = B00 + B11
    {0, -1, false},  // T2 = B00
    {1, 3, true},   // T3 = B01 - B11
    {2, 0, true},   // T4 = B10 - B00
    {3, -1, false},  // T5 = B11
    {0, 1, false},  // T6 = B00 + B01
    {2, 3, false},  // T7 = B10 + B11
}};

struct Term {
  int product;  // 0-based r
  bool negate;
};

// C00 = P1 + P4 - P5 + P7, C01 = P3 + P5, C10 = P2 + P4, C11 = P1 - P2 + P3 + P6.
// Terms are listed in increasing r; the first is always positive.
inline const std::array<std::vector<Term>, 4> C = {{
    {{0, false}, {3, false}, {4, true}, {6, false}},
    {{2, false}, {4, false}},
    {{1, false}, {3, false}},
    {{0, false}, {1, true}, {2, false}, {5, false}},
}};

// Quadrants of C that product r contributes to, with sign.
struct Target {
  int quadrant;
  bool negate;
};

inline std::vector<Target> targets(int r) {
  std::vector<Target> out;
  for (int q = 0; q < 4; ++q)
    for (const auto& t : C[q])
      if (t.product == r) out.push_back({q, t.negate});
  return out;
}

inline constexpr int temporaries_per_step = 17;  // 10 non-bare operands + 7 products

}  // namespace strassen_table

// The seven products of one Strassen step, each computed with naive_mm. Used to
// check the operand table on small inputs.
template <Ring S>
std::array<Matrix<typename S::value_type>, 7> strassen_products(const Matrix<typename S::value_type>& a,
                                                               const Matrix<typename S::value_type>& b) {
  using T = typename S::value_type;
  require(a.rows() == a.cols() && b.rows() == b.cols() && a.rows() == b.rows(), ErrorCode::DimMismatch,
          "operands must be equal squares");
  require(a.rows() % 2 == 0, ErrorCode::InvalidSplit, "odd dimension");
  std::size_t h = a.rows() / 2;
  auto operand = [&](const Matrix<T>& m, const strassen_table::Operand& op) {
    auto r = m.region();
    Matrix<T> out(h, h, S::zero());
    auto x = quadrant(r, op.x / 2, op.x % 2);
    if (op.bare()) kernel::copy<S>(out.region(), x);
    else kernel::combine<S>(out.region(), x, quadrant(r, op.y / 2, op.y % 2), op.subtract);
    return out;
  };
  std::array<Matrix<T>, 7> p;
  for (int r = 0; r < 7; ++r) p[r] = naive_mm<S>(operand(a, strassen_table::S[r]), operand(b, strassen_table::T[r]));
  return p;
}

namespace detail {

template <Semiring S>
class Strassen {
 public:
  using T = typename S::value_type;
  using Region = MatrixRegion<T>;
  using Temp = typename Runtime<T>::Temp;

  Strassen(Runtime<T>& rt, unsigned k) : rt_(rt), b_(rt.base()), k_(k) {}

  // Straightforward step: every non-bare operand and every product gets its
  // own temporary; products recurse through `child`.
  template <class Child>
  void step(const Region& c, const Region& a, const Region& b, unsigned d, AllocMode alloc, Child&& child) {
    std::size_t h = c.rows / 2;
    std::vector<std::unique_ptr<Temp>> temps;
    temps.reserve(strassen_table::temporaries_per_step);
    Region s[7], t[7], p[7];
    for (int r = 0; r < 7; ++r) {
      s[r] = operand_region(a, strassen_table::S[r], temps, h, d, alloc);
      t[r] = operand_region(b, strassen_table::T[r], temps, h, d, alloc);
    }
    for (int r = 0; r < 7; ++r) {
      temps.push_back(std::make_unique<Temp>(rt_, h, d, alloc));
      p[r] = temps.back()->region();
    }
    std::vector<std::function<void()>> forms;
    for (int r = 0; r < 7; ++r) {
      if (!strassen_table::S[r].bare()) forms.push_back([&, r] { form(s[r], a, strassen_table::S[r]); });
      if (!strassen_table::T[r].bare()) forms.push_back([&, r] { form(t[r], b, strassen_table::T[r]); });
    }
    rt_.scheduler().invoke_all(forms);
    rt_.invoke([&] { child(p[0], s[0], t[0]); }, [&] { child(p[1], s[1], t[1]); }, [&] { child(p[2], s[2], t[2]); },
               [&] { child(p[3], s[3], t[3]); }, [&] { child(p[4], s[4], t[4]); }, [&] { child(p[5], s[5], t[5]); },
               [&] { child(p[6], s[6], t[6]); });
    auto assemble = [&](int q) {
      Region cq = quadrant(c, q / 2, q % 2);
      const auto& terms = strassen_table::C[q];
      kernel::copy<S>(cq, p[terms[0].product], rt_.trace());
      for (std::size_t i = 1; i < terms.size(); ++i)
        kernel::add_scaled<S>(cq, p[terms[i].product], scale(terms[i].negate), rt_.trace());
    };
    rt_.invoke([&] { assemble(0); }, [&] { assemble(1); }, [&] { assemble(2); }, [&] { assemble(3); });
  }

  void parallel(const Region& c, const Region& a, const Region& b, unsigned d, AllocMode alloc) {
    TaskScope scope(rt_.metrics(), d);
    if (c.rows == b_) {
      plain_base<S>(rt_, c, a, b, kernel::Mode::Overwrite);
      return;
    }
    step(c, a, b, d, alloc,
         [this, d, alloc](const Region& pr, const Region& sr, const Region& tr) { parallel(pr, sr, tr, d + 1, alloc); });
  }

  // Three scratch blocks per product; products merge into C as they finish.
  void sar(const Region& c, const Region& a, const Region& b, unsigned d) {
    TaskScope scope(rt_.metrics(), d);
    if (c.rows == b_) {
      plain_base<S>(rt_, c, a, b, kernel::Mode::Overwrite);
      return;
    }
    kernel::fill<S>(c, S::zero(), rt_.trace());
    auto product = [&, d](int r) { sar_product(c, a, b, r, d + 1); };
    rt_.invoke([&] { product(0); }, [&] { product(1); }, [&] { product(2); }, [&] { product(3); },
               [&] { product(4); }, [&] { product(5); }, [&] { product(6); });
  }

  void star1(const Region& c, const Region& a, const Region& b, unsigned d) {
    if (d < k_ && c.rows > b_) {
      TaskScope scope(rt_.metrics(), d);
      auto q = [](const Region& r, unsigned i, unsigned j) { return quadrant(r, i, j); };
      auto go = [&](unsigned i, unsigned j, unsigned l) { star1(q(c, i, j), q(a, i, l), q(b, l, j), d + 1); };
      rt_.invoke([&] { go(0, 0, 0); }, [&] { go(0, 1, 0); }, [&] { go(1, 0, 0); }, [&] { go(1, 1, 0); },
                 [&] { go(0, 0, 1); }, [&] { go(0, 1, 1); }, [&] { go(1, 0, 1); }, [&] { go(1, 1, 1); });
      return;
    }
    Temp temp(rt_, c.rows, d, AllocMode::Pooled);
    sar(temp.region(), a, b, d);
    atomic_accumulate<S>(rt_, c, temp.region());
  }

  void star2(const Region& c, const Region& a, const Region& b, unsigned d) {
    if (d < k_ && c.rows > b_) {
      TaskScope scope(rt_.metrics(), d);
      step(c, a, b, d, AllocMode::Pooled,
           [this, d](const Region& pr, const Region& sr, const Region& tr) { star2(pr, sr, tr, d + 1); });
      return;
    }
    sar(c, a, b, d);
  }

 private:
  static T scale(bool negate) {
    if constexpr (Ring<S>) return negate ? minus_one<S>() : S::one();
    else fail(ErrorCode::NoAdditiveInverse, "Strassen schedules require a ring");
  }

  static Region operand_quadrant(const Region& m, int q) { return quadrant(m, q / 2, q % 2); }

  Region operand_region(const Region& m, const strassen_table::Operand& op, std::vector<std::unique_ptr<Temp>>& temps,
                        std::size_t h, unsigned d, AllocMode alloc) {
    if (op.bare()) return operand_quadrant(m, op.x);
    temps.push_back(std::make_unique<Temp>(rt_, h, d, alloc));
    return temps.back()->region();
  }

  void form(const Region& dst, const Region& m, const strassen_table::Operand& op) {
    if (op.bare()) kernel::copy<S>(dst, operand_quadrant(m, op.x), rt_.trace());
    else kernel::combine<S>(dst, operand_quadrant(m, op.x), operand_quadrant(m, op.y), op.subtract, rt_.trace());
  }

  void sar_product(const Region& c, const Region& a, const Region& b, int r, unsigned d) {
    std::size_t h = c.rows / 2;
    {
      rt_.metrics().scratch_acquired(3);
      Temp s(rt_, h, d, AllocMode::Pooled), t(rt_, h, d, AllocMode::Pooled), p(rt_, h, d, AllocMode::Pooled);
      form(s.region(), a, strassen_table::S[r]);
      form(t.region(), b, strassen_table::T[r]);
      sar(p.region(), s.region(), t.region(), d);
      auto tg = strassen_table::targets(r);
      auto merge = [&](const strassen_table::Target& x) {
        atomic_accumulate<S>(rt_, operand_quadrant(c, x.quadrant), p.region(), scale(x.negate));
      };
      if (tg.size() == 2) rt_.invoke([&] { merge(tg[0]); }, [&] { merge(tg[1]); });
      else merge(tg[0]);
    }
    rt_.metrics().scratch_released(3);
  }

  Runtime<T>& rt_;
  std::size_t b_;
  unsigned k_;
};

template <Semiring S, class F>
void strassen_entry(Runtime<typename S::value_type>& rt, MatrixRegion<typename S::value_type> c,
                    const MatrixRegion<typename S::value_type>& a, const MatrixRegion<typename S::value_type>& b,
                    F&& body) {
  if constexpr (!Ring<S>) {
    fail(ErrorCode::NoAdditiveInverse, std::string("Strassen schedules require a ring; '") + std::string(S::name) +
                                           "' has no additive inverse");
  } else {
    validate_operands(rt.config(), c, a, b);
    OutputSlots<typename S::value_type> slots(c, rt.base());
    run_in(rt, [&] {
      Strassen<S> alg(rt, switch_depth(rt.workers()));
      body(alg, c);
    });
  }
}

}  // namespace detail

template <Semiring S>
void strassen_parallel(Runtime<typename S::value_type>& rt, const MatrixRegion<typename S::value_type>& c,
                       const MatrixRegion<typename S::value_type>& a, const MatrixRegion<typename S::value_type>& b,
                       AllocMode mode = AllocMode::Pooled) {
  detail::strassen_entry<S>(rt, c, a, b, [&](auto& alg, const auto& cr) { alg.parallel(cr, a, b, 0, mode); });
}

template <Semiring S>
void sar_strassen(Runtime<typename S::value_type>& rt, const MatrixRegion<typename S::value_type>& c,
                  const MatrixRegion<typename S::value_type>& a, const MatrixRegion<typename S::value_type>& b) {
  detail::strassen_entry<S>(rt, c, a, b, [&](auto& alg, const auto& cr) { alg.sar(cr, a, b, 0); });
}

template <Semiring S>
void star_strassen_1(Runtime<typename S::value_type>& rt, const MatrixRegion<typename S::value_type>& c,
                     const MatrixRegion<typename S::value_type>& a, const MatrixRegion<typename S::value_type>& b) {
  detail::strassen_entry<S>(rt, c, a, b, [&](auto& alg, const auto& cr) {
    if (switch_depth(rt.workers()) == 0) {
      alg.sar(cr, a, b, 0);
      return;
    }
    kernel::fill<S>(cr, S::zero(), rt.trace());
    alg.star1(cr, a, b, 0);
  });
}

template <Semiring S>
void star_strassen_2(Runtime<typename S::value_type>& rt, const MatrixRegion<typename S::value_type>& c,
                     const MatrixRegion<typename S::value_type>& a, const MatrixRegion<typename S::value_type>& b) {
  detail::strassen_entry<S>(rt, c, a, b, [&](auto& alg, const auto& cr) { alg.star2(cr, a, b, 0); });
}

}  // namespace starmm
