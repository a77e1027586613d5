// Copyright 2026 The revlin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "revlin/error.hpp"
#include "revlin/rational.hpp"

namespace revlin {

/// Opaque handle to an arena cell. The generation distinguishes a stale handle
/// from a fresh handle that reuses the same slot.
struct CellId {
  std::uint32_t index = 0;
  std::uint32_t generation = 0;

  std::uint64_t key() const noexcept {
    return (static_cast<std::uint64_t>(generation) << 32) | index;
  }
  friend bool operator==(CellId, CellId) = default;
};

inline std::string to_string(CellId c) { return "c" + std::to_string(c.index); }

enum class Direction { kForward, kBackward };

inline Direction opposite(Direction d) {
  return d == Direction::kForward ? Direction::kBackward : Direction::kForward;
}

enum class Op : std::uint8_t {
  kAddConst,
  kSubConst,
  kAddScaled,
  kSubScaled,
  kAddMul,
  kSubMul,
  kAddDiv,
  kSubDiv,
  kScale,
  kUnscale,
  kSwap,
};

inline Op inverse(Op op) {
  switch (op) {
    case Op::kAddConst: return Op::kSubConst;
    case Op::kSubConst: return Op::kAddConst;
    case Op::kAddScaled: return Op::kSubScaled;
    case Op::kSubScaled: return Op::kAddScaled;
    case Op::kAddMul: return Op::kSubMul;
    case Op::kSubMul: return Op::kAddMul;
    case Op::kAddDiv: return Op::kSubDiv;
    case Op::kSubDiv: return Op::kAddDiv;
    case Op::kScale: return Op::kUnscale;
    case Op::kUnscale: return Op::kScale;
    case Op::kSwap: return Op::kSwap;
  }
  return op;
}

/// Additive updates (dst += f(other cells)); the only kinds allowed in the
/// copy leg of a compute-copy-uncompute block.
inline bool is_additive(Op op) {
  return op != Op::kScale && op != Op::kUnscale && op != Op::kSwap;
}

inline std::size_t operand_count(Op op) {
  switch (op) {
    case Op::kAddConst:
    case Op::kSubConst: return 0;
    case Op::kAddScaled:
    case Op::kSubScaled:
    case Op::kScale:
    case Op::kUnscale:
    case Op::kSwap: return 1;
    default: return 2;
  }
}

/// One invertible statement. Operand meaning by kind:
///   AddConst/SubConst   dst ±= k
///   AddScaled/SubScaled dst ±= k * a
///   AddMul/SubMul       dst ±= a * b
///   AddDiv/SubDiv       dst ±= a / b
///   Scale/Unscale       dst *= a, dst /= a
///   Swap                dst <-> a
struct Primitive {
  Op op = Op::kAddConst;
  CellId dst;
  CellId a;
  CellId b;
  Rational k;

  // Constants are canonicalized here: mpq_class(p, q) does not reduce.
  static Primitive add_const(CellId dst, Rational k) { return {Op::kAddConst, dst, {}, {}, canonical(std::move(k))}; }
  static Primitive sub_const(CellId dst, Rational k) { return {Op::kSubConst, dst, {}, {}, canonical(std::move(k))}; }
  static Primitive add_scaled(CellId dst, CellId src, Rational k) { return {Op::kAddScaled, dst, src, {}, canonical(std::move(k))}; }
  static Primitive sub_scaled(CellId dst, CellId src, Rational k) { return {Op::kSubScaled, dst, src, {}, canonical(std::move(k))}; }
  static Primitive add_mul(CellId dst, CellId a, CellId b) { return {Op::kAddMul, dst, a, b, {}}; }
  static Primitive sub_mul(CellId dst, CellId a, CellId b) { return {Op::kSubMul, dst, a, b, {}}; }
  static Primitive add_div(CellId dst, CellId a, CellId b) { return {Op::kAddDiv, dst, a, b, {}}; }
  static Primitive sub_div(CellId dst, CellId a, CellId b) { return {Op::kSubDiv, dst, a, b, {}}; }
  static Primitive scale(CellId dst, CellId src) { return {Op::kScale, dst, src, {}, {}}; }
  static Primitive unscale(CellId dst, CellId src) { return {Op::kUnscale, dst, src, {}, {}}; }
  static Primitive swap(CellId x, CellId y) { return {Op::kSwap, x, y, {}, {}}; }

  static Rational canonical(Rational k) {
    k.canonicalize();
    return k;
  }

  /// The syntactic inverse: same operands, inverse kind.
  Primitive inverted() const { return {revlin::inverse(op), dst, a, b, k}; }

  /// Cells the primitive writes (dst, plus a for Swap).
  template <typename F>
  void for_each_written(F&& f) const {
    f(dst);
    if (op == Op::kSwap) f(a);
  }
  template <typename F>
  void for_each_operand(F&& f) const {
    f(dst);
    const std::size_t count = operand_count(op);
    if (count >= 1) f(a);
    if (count >= 2) f(b);
  }

  bool alias_free() const {
    if (op == Op::kSwap) return true;
    const std::size_t count = operand_count(op);
    if (count >= 1 && a == dst) return false;
    if (count >= 2 && b == dst) return false;
    return true;
  }

  friend bool operator==(const Primitive& x, const Primitive& y) {
    if (x.op != y.op || !(x.dst == y.dst)) return false;
    const std::size_t count = operand_count(x.op);
    if (count >= 1 && !(x.a == y.a)) return false;
    if (count >= 2 && !(x.b == y.b)) return false;
    if (count == 0 || x.op == Op::kAddScaled || x.op == Op::kSubScaled) return x.k == y.k;
    return true;
  }
};

/// One line per primitive, e.g. "ADDMUL c12 += c3 * c7".
inline std::string to_string(const Primitive& p) {
  const std::string d = to_string(p.dst);
  switch (p.op) {
    case Op::kAddConst: return "ADDCONST " + d + " += " + to_string(p.k);
    case Op::kSubConst: return "SUBCONST " + d + " -= " + to_string(p.k);
    case Op::kAddScaled: return "ADDSCALED " + d + " += " + to_string(p.k) + " * " + to_string(p.a);
    case Op::kSubScaled: return "SUBSCALED " + d + " -= " + to_string(p.k) + " * " + to_string(p.a);
    case Op::kAddMul: return "ADDMUL " + d + " += " + to_string(p.a) + " * " + to_string(p.b);
    case Op::kSubMul: return "SUBMUL " + d + " -= " + to_string(p.a) + " * " + to_string(p.b);
    case Op::kAddDiv: return "ADDDIV " + d + " += " + to_string(p.a) + " / " + to_string(p.b);
    case Op::kSubDiv: return "SUBDIV " + d + " -= " + to_string(p.a) + " / " + to_string(p.b);
    case Op::kScale: return "SCALE " + d + " *= " + to_string(p.a);
    case Op::kUnscale: return "UNSCALE " + d + " /= " + to_string(p.a);
    case Op::kSwap: return "SWAP " + d + " <-> " + to_string(p.a);
  }
  return "?";
}

struct ResourceReport {
  std::size_t primitive_ops = 0;
  std::size_t peak_live_cells = 0;
  std::size_t persistent_cells = 0;
  std::size_t transient_peak = 0;
  std::size_t garbage_cells = 0;
  std::size_t max_bits = 0;

  friend bool operator==(const ResourceReport&, const ResourceReport&) = default;
};

struct ArenaOptions {
  /// Abort with kBitLimit when any written value exceeds this bit width.
  std::optional<std::size_t> max_bits;
  /// Verify canonical form of every written value (test builds).
  bool check_canonical = false;
};

/// Every cell value paired with its handle; compared with == for round trips.
using Snapshot = std::vector<std::pair<std::uint64_t, Rational>>;

/// Reversible memory. Cells are mutated only through step(); the counters are
/// observational and never feed back into values.
///
/// A cell is free, live or dormant. Dormant cells are ancilla reserved by a
/// program builder: they exist (and can be read) but cannot be operated on
/// until a compute-copy-uncompute block activates them, and the block must
/// hand them back zeroed. Only live cells count toward live_count.
class Arena {
 public:
  explicit Arena(ArenaOptions options = {}) : options_(options) {}

  std::vector<CellId> alloc(std::size_t n) { return allocate(n, State::kLive); }

  /// Reserves n zero cells in the dormant state.
  std::vector<CellId> alloc_ancilla(std::size_t n) { return allocate(n, State::kDormant); }

  /// Releases live or dormant cells; every one must be zero.
  void free(std::span<const CellId> cells) {
    for (const CellId c : cells) {
      const std::size_t i = check_allocated(c);
      if (sgn(values_[i]) != 0) {
        throw Error(Errc::kGarbageLeak,
                    to_string(c) + " is nonzero (" + to_string(values_[i]) + ") at free");
      }
    }
    for (const CellId c : cells) {
      const std::size_t i = check_allocated(c);
      if (states_[i] == State::kLive) --live_count_;
      states_[i] = State::kFree;
      ++generations_[i];
      free_list_.push_back(static_cast<std::uint32_t>(i));
    }
  }

  void activate(std::span<const CellId> cells) {
    for (const CellId c : cells) {
      const std::size_t i = check_allocated(c);
      if (states_[i] != State::kDormant) {
        throw Error(Errc::kInvalidCell, to_string(c) + " is not a dormant ancilla");
      }
      states_[i] = State::kLive;
      ++live_count_;
    }
    note_live();
  }

  /// Returns ancilla to the dormant state. Nonzero cells are garbage.
  void deactivate(std::span<const CellId> cells) {
    std::size_t dirty = 0;
    std::string first;
    for (const CellId c : cells) {
      const std::size_t i = check_allocated(c);
      if (sgn(values_[i]) != 0) {
        if (dirty++ == 0) first = to_string(c) + " = " + to_string(values_[i]);
      }
    }
    if (dirty != 0) {
      garbage_cells_ += dirty;
      throw Error(Errc::kGarbageLeak, std::to_string(dirty) +
                                          " ancilla cell(s) left nonzero at scope exit, first " +
                                          first);
    }
    for (const CellId c : cells) {
      const std::size_t i = check_allocated(c);
      if (states_[i] != State::kLive) {
        throw Error(Errc::kInvalidCell, to_string(c) + " is not an active ancilla");
      }
      states_[i] = State::kDormant;
      --live_count_;
    }
  }

  const Rational& read(CellId c) const { return values_[check_allocated(c)]; }

  void step(const Primitive& prim, Direction direction) {
    const Op op = direction == Direction::kForward ? prim.op : inverse(prim.op);
    prim.for_each_operand([&](CellId c) { check_live(c); });
    if (!prim.alias_free()) {
      throw Error(Errc::kAliasViolation, "destination aliases a source in '" + to_string(prim) + "'");
    }

    Rational& dst = values_[prim.dst.index];
    switch (op) {
      case Op::kAddConst: dst += prim.k; break;
      case Op::kSubConst: dst -= prim.k; break;
      case Op::kAddScaled: dst += prim.k * values_[prim.a.index]; break;
      case Op::kSubScaled: dst -= prim.k * values_[prim.a.index]; break;
      case Op::kAddMul: dst += values_[prim.a.index] * values_[prim.b.index]; break;
      case Op::kSubMul: dst -= values_[prim.a.index] * values_[prim.b.index]; break;
      case Op::kAddDiv:
      case Op::kSubDiv: {
        const Rational& divisor = values_[prim.b.index];
        if (sgn(divisor) == 0) {
          throw Error(Errc::kDivideByZero, "divisor " + to_string(prim.b) + " is zero");
        }
        if (op == Op::kAddDiv) {
          dst += values_[prim.a.index] / divisor;
        } else {
          dst -= values_[prim.a.index] / divisor;
        }
        break;
      }
      case Op::kScale:
      case Op::kUnscale: {
        const Rational& factor = values_[prim.a.index];
        if (sgn(factor) == 0) {
          throw Error(Errc::kNonInvertible, "multiplier " + to_string(prim.a) + " is zero");
        }
        if (op == Op::kScale) {
          dst *= factor;
        } else {
          dst /= factor;
        }
        break;
      }
      case Op::kSwap: std::swap(dst, values_[prim.a.index]); break;
    }
    ++op_count_;
    prim.for_each_written([&](CellId c) { note_write(c); });
  }

  Snapshot snapshot() const {
    Snapshot out;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (states_[i] == State::kFree) continue;
      out.emplace_back(CellId{static_cast<std::uint32_t>(i), generations_[i]}.key(), values_[i]);
    }
    return out;
  }

  /// Starts a fresh measurement window; see window_peak_live / window_max_bits.
  void reset_window() {
    window_peak_live_ = live_count_;
    window_max_bits_ = 0;
  }

  std::size_t live_count() const noexcept { return live_count_; }
  std::size_t peak_live() const noexcept { return peak_live_; }
  std::size_t op_count() const noexcept { return op_count_; }
  std::size_t max_bits() const noexcept { return max_bits_; }
  std::size_t garbage_cells() const noexcept { return garbage_cells_; }
  std::size_t window_peak_live() const noexcept { return window_peak_live_; }
  std::size_t window_max_bits() const noexcept { return window_max_bits_; }
  const ArenaOptions& options() const noexcept { return options_; }

 private:
  enum class State : std::uint8_t { kFree, kLive, kDormant };

  std::vector<CellId> allocate(std::size_t n, State state) {
    std::vector<CellId> out;
    out.reserve(n);
    for (std::size_t c = 0; c < n; ++c) {
      std::uint32_t i;
      if (!free_list_.empty()) {
        i = free_list_.back();
        free_list_.pop_back();
      } else {
        i = static_cast<std::uint32_t>(values_.size());
        values_.emplace_back();
        states_.push_back(State::kFree);
        generations_.push_back(0);
      }
      states_[i] = state;
      values_[i] = 0;
      out.push_back(CellId{i, generations_[i]});
    }
    if (state == State::kLive) {
      live_count_ += n;
      note_live();
    }
    return out;
  }

  std::size_t check_allocated(CellId c) const {
    if (c.index >= values_.size() || states_[c.index] == State::kFree ||
        generations_[c.index] != c.generation) {
      throw Error(Errc::kInvalidCell, to_string(c) + " is not allocated");
    }
    return c.index;
  }

  void check_live(CellId c) const {
    if (states_[check_allocated(c)] != State::kLive) {
      throw Error(Errc::kInvalidCell, to_string(c) + " is an ancilla used outside its scope");
    }
  }

  void note_live() {
    peak_live_ = std::max(peak_live_, live_count_);
    window_peak_live_ = std::max(window_peak_live_, live_count_);
  }

  void note_write(CellId c) {
    const Rational& v = values_[c.index];
    const std::size_t bits = bit_width(v);
    max_bits_ = std::max(max_bits_, bits);
    window_max_bits_ = std::max(window_max_bits_, bits);
    if (options_.max_bits && bits > *options_.max_bits) {
      throw Error(Errc::kBitLimit, to_string(c) + " needs " + std::to_string(bits) +
                                       " bits, above the limit of " +
                                       std::to_string(*options_.max_bits));
    }
    if (options_.check_canonical && !is_canonical(v)) {
      throw Error(Errc::kInvalidCell, to_string(c) + " holds a non-canonical rational");
    }
  }

  ArenaOptions options_;
  std::vector<Rational> values_;
  std::vector<State> states_;
  std::vector<std::uint32_t> generations_;
  std::vector<std::uint32_t> free_list_;
  std::size_t live_count_ = 0;
  std::size_t peak_live_ = 0;
  std::size_t op_count_ = 0;
  std::size_t max_bits_ = 0;
  std::size_t garbage_cells_ = 0;
  std::size_t window_peak_live_ = 0;
  std::size_t window_max_bits_ = 0;
};

}  // namespace revlin
