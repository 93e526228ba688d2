#pragma once

#include <array>
#include <cstdlib>
#include <string>
#include <vector>

#include "vvnet/common.hpp"

namespace vvnet::group {

// One element of p4 / p4m as a 4x4 integer matrix in homogeneous form,
// acting on column vectors (x, y, z, 1). The top-left 3x3 block of any
// valid element is a signed permutation matrix; the last row is (0,0,0,1).
struct GroupElement {
  std::array<int, 16> m{};

  int at(int r, int c) const { return m[static_cast<std::size_t>(r * 4 + c)]; }
  int& at(int r, int c) { return m[static_cast<std::size_t>(r * 4 + c)]; }

  std::array<int, 3> translation() const { return {at(0, 3), at(1, 3), at(2, 3)}; }
  bool has_zero_translation() const {
    return at(0, 3) == 0 && at(1, 3) == 0 && at(2, 3) == 0;
  }

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
  friend auto operator<=>(const GroupElement&, const GroupElement&) = default;
};

inline GroupElement identity() {
  GroupElement g;
  g.at(0, 0) = g.at(1, 1) = g.at(2, 2) = g.at(3, 3) = 1;
  return g;
}

inline GroupElement compose(const GroupElement& a, const GroupElement& b) {
  GroupElement c;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      int s = 0;
      for (int k = 0; k < 4; ++k) s += a.at(i, k) * b.at(k, j);
      c.at(i, j) = s;
    }
  return c;
}

inline bool is_signed_permutation(const GroupElement& g) {
  for (int i = 0; i < 3; ++i) {
    int row_nz = 0, col_nz = 0;
    for (int j = 0; j < 3; ++j) {
      int r = g.at(i, j), c = g.at(j, i);
      if (r != 0) {
        if (std::abs(r) != 1) return false;
        ++row_nz;
      }
      if (c != 0) ++col_nz;
    }
    if (row_nz != 1 || col_nz != 1) return false;
  }
  return g.at(3, 0) == 0 && g.at(3, 1) == 0 && g.at(3, 2) == 0 && g.at(3, 3) == 1;
}

inline int rotation_determinant(const GroupElement& g) {
  return g.at(0, 0) * (g.at(1, 1) * g.at(2, 2) - g.at(1, 2) * g.at(2, 1)) -
         g.at(0, 1) * (g.at(1, 0) * g.at(2, 2) - g.at(1, 2) * g.at(2, 0)) +
         g.at(0, 2) * (g.at(1, 0) * g.at(2, 1) - g.at(1, 1) * g.at(2, 0));
}

// Exact inverse for signed-permutation rotation blocks: R^-1 = R^T and
// t -> -R^T t.
inline GroupElement inverse(const GroupElement& a) {
  GroupElement inv;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) inv.at(i, j) = a.at(j, i);
  for (int i = 0; i < 3; ++i) {
    int t = 0;
    for (int j = 0; j < 3; ++j) t += a.at(j, i) * a.at(j, 3);
    inv.at(i, 3) = -t;
  }
  inv.at(3, 3) = 1;
  return inv;
}

inline std::array<int, 3> act(const GroupElement& a, const std::array<int, 3>& p) {
  std::array<int, 3> q{};
  for (int i = 0; i < 3; ++i)
    q[static_cast<std::size_t>(i)] = a.at(i, 0) * p[0] + a.at(i, 1) * p[1] +
                                     a.at(i, 2) * p[2] + a.at(i, 3);
  return q;
}

namespace detail {

// cos / sin of r*pi/2 over the integers
inline constexpr int kCos[4] = {1, 0, -1, 0};
inline constexpr int kSin[4] = {0, 1, 0, -1};

// The printed mirror-rotation matrix touches the (x, y) coordinate pair; the
// other two factors permute that pair cyclically: (x,y) -> (y,z) -> (z,x).
inline GroupElement axis_factor(int axis, int mirror, int rot) {
  static constexpr int kPair[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  const int i = kPair[axis][0], j = kPair[axis][1];
  const int c = kCos[rot], s = kSin[rot];
  const int sign = mirror ? -1 : 1;
  GroupElement g = identity();
  g.at(i, i) = sign * c;
  g.at(i, j) = -sign * s;
  g.at(j, i) = s;
  g.at(j, j) = c;
  return g;
}

}  // namespace detail

inline GroupElement translation(const std::array<int, 3>& t) {
  GroupElement g = identity();
  g.at(0, 3) = t[0];
  g.at(1, 3) = t[1];
  g.at(2, 3) = t[2];
  return g;
}

// g(m, r, t) = R_mx * R_my * R_mz * T with each factor an exact integer
// matrix. m in {0,1}^3 selects mirrors, r in {0,1,2,3}^3 selects quarter
// turns, t is an arbitrary integer translation.
inline GroupElement from_params(const std::array<int, 3>& mirror,
                                const std::array<int, 3>& rot,
                                const std::array<int, 3>& trans = {0, 0, 0}) {
  for (int i = 0; i < 3; ++i) {
    require(mirror[static_cast<std::size_t>(i)] == 0 || mirror[static_cast<std::size_t>(i)] == 1,
            ErrorCategory::domain, "mirror parameter must be 0 or 1");
    require(rot[static_cast<std::size_t>(i)] >= 0 && rot[static_cast<std::size_t>(i)] <= 3,
            ErrorCategory::domain, "rotation parameter must be in {0,1,2,3}");
  }
  GroupElement g = detail::axis_factor(0, mirror[0], rot[0]);
  g = compose(g, detail::axis_factor(1, mirror[1], rot[1]));
  g = compose(g, detail::axis_factor(2, mirror[2], rot[2]));
  g = compose(g, translation(trans));
  return g;
}

enum class Kind { p4, p4m };

inline const char* kind_name(Kind k) { return k == Kind::p4 ? "p4" : "p4m"; }

// The subgroup fixing the origin: one element per mirror/rotation parameter
// combination, optionally deduplicated by matrix in first-seen order.
struct StabilizerSet {
  std::vector<GroupElement> elements;
  Kind kind = Kind::p4;

  int size() const { return static_cast<int>(elements.size()); }

  int index_of(const GroupElement& g) const {
    for (std::size_t i = 0; i < elements.size(); ++i)
      if (elements[i] == g) return static_cast<int>(i);
    return -1;
  }
};

inline StabilizerSet enumerate_stabilizer(Kind kind, bool dedupe = true) {
  StabilizerSet set;
  set.kind = kind;
  const int mirror_hi = (kind == Kind::p4m) ? 1 : 0;
  for (int mx = 0; mx <= mirror_hi; ++mx)
    for (int my = 0; my <= mirror_hi; ++my)
      for (int mz = 0; mz <= mirror_hi; ++mz)
        for (int rx = 0; rx < 4; ++rx)
          for (int ry = 0; ry < 4; ++ry)
            for (int rz = 0; rz < 4; ++rz) {
              GroupElement g = from_params({mx, my, mz}, {rx, ry, rz});
              if (dedupe && set.index_of(g) >= 0) continue;
              set.elements.push_back(g);
            }
  return set;
}

struct AxiomReport {
  bool closed = false;
  bool has_identity = false;
  bool has_inverses = false;
  bool associative = false;
  bool ok() const { return closed && has_identity && has_inverses && associative; }
};

// Exhaustive axiom check by exact integer equality. Associativity runs over
// all |G|^3 triples when requested.
inline AxiomReport check_axioms(const StabilizerSet& set, bool exhaustive_associativity = true) {
  AxiomReport rep;
  rep.has_identity = set.index_of(identity()) >= 0;
  rep.closed = true;
  rep.has_inverses = true;
  for (const auto& a : set.elements) {
    if (set.index_of(inverse(a)) < 0) rep.has_inverses = false;
    for (const auto& b : set.elements)
      if (set.index_of(compose(a, b)) < 0) rep.closed = false;
  }
  rep.associative = true;
  if (exhaustive_associativity) {
    for (const auto& a : set.elements)
      for (const auto& b : set.elements) {
        const GroupElement ab = compose(a, b);
        for (const auto& c : set.elements)
          if (compose(ab, c) != compose(a, compose(b, c))) rep.associative = false;
      }
  }
  return rep;
}

}  // namespace vvnet::group
