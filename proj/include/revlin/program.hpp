// Copyright 2026 The revlin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "revlin/arena.hpp"
#include "revlin/error.hpp"

namespace revlin {

struct ProgramNode;

/// Immutable tree of reversible statements. Copies share structure, so a
/// program can be handed to several threads and run on independent arenas.
class RevProgram {
 public:
  struct Seq {
    std::vector<RevProgram> children;
  };
  struct Inverse {
    std::vector<RevProgram> body;  // exactly one element
  };
  /// Compute, copy, then undo compute. `ancilla` are dormant cells that the
  /// block activates on entry and must return to zero on exit.
  struct Ccu {
    std::vector<RevProgram> legs;  // {compute, copy}
    std::vector<CellId> ancilla;
  };
  using Body = std::variant<Primitive, Seq, Inverse, Ccu>;

  RevProgram();  // empty Seq

  static RevProgram prim(Primitive p, std::string label = {});
  static RevProgram seq(std::vector<RevProgram> children, std::string label = {});
  static RevProgram inverse_of(RevProgram body, std::string label = {});
  /// Builds a Ccu node without validating the copy leg; see ccu().
  static RevProgram ccu_unchecked(RevProgram compute, RevProgram copy,
                                  std::vector<CellId> ancilla = {}, std::string label = {});

  const Body& body() const;
  const std::string& label() const;

  bool is_prim() const { return std::holds_alternative<Primitive>(body()); }
  bool is_seq() const { return std::holds_alternative<Seq>(body()); }
  bool is_inverse() const { return std::holds_alternative<Inverse>(body()); }
  bool is_ccu() const { return std::holds_alternative<Ccu>(body()); }

  friend bool operator==(const RevProgram& a, const RevProgram& b);

 private:
  explicit RevProgram(std::shared_ptr<const ProgramNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const ProgramNode> node_;
};

struct ProgramNode {
  RevProgram::Body body;
  std::string label;
};

inline RevProgram::RevProgram()
    : node_(std::make_shared<const ProgramNode>(ProgramNode{Seq{}, {}})) {}

inline RevProgram RevProgram::prim(Primitive p, std::string label) {
  if (!p.alias_free()) {
    throw Error(Errc::kAliasViolation, "destination aliases a source in '" + to_string(p) + "'");
  }
  return RevProgram(std::make_shared<const ProgramNode>(ProgramNode{std::move(p), std::move(label)}));
}

inline RevProgram RevProgram::seq(std::vector<RevProgram> children, std::string label) {
  return RevProgram(
      std::make_shared<const ProgramNode>(ProgramNode{Seq{std::move(children)}, std::move(label)}));
}

inline RevProgram RevProgram::inverse_of(RevProgram body, std::string label) {
  return RevProgram(std::make_shared<const ProgramNode>(
      ProgramNode{Inverse{{std::move(body)}}, std::move(label)}));
}

inline RevProgram RevProgram::ccu_unchecked(RevProgram compute, RevProgram copy,
                                            std::vector<CellId> ancilla, std::string label) {
  return RevProgram(std::make_shared<const ProgramNode>(ProgramNode{
      Ccu{{std::move(compute), std::move(copy)}, std::move(ancilla)}, std::move(label)}));
}

inline const RevProgram::Body& RevProgram::body() const { return node_->body; }
inline const std::string& RevProgram::label() const { return node_->label; }

inline bool operator==(const RevProgram& a, const RevProgram& b) {
  if (a.node_ == b.node_) return true;
  if (a.label() != b.label() || a.body().index() != b.body().index()) return false;
  return std::visit(
      [&](const auto& lhs) -> bool {
        using T = std::decay_t<decltype(lhs)>;
        const auto& rhs = std::get<T>(b.body());
        if constexpr (std::is_same_v<T, Primitive>) {
          return lhs == rhs;
        } else if constexpr (std::is_same_v<T, RevProgram::Seq>) {
          return lhs.children == rhs.children;
        } else if constexpr (std::is_same_v<T, RevProgram::Inverse>) {
          return lhs.body == rhs.body;
        } else {
          return lhs.legs == rhs.legs && lhs.ancilla == rhs.ancilla;
        }
      },
      a.body());
}

/// Calls f(primitive) for every primitive in the tree, in forward order,
/// ignoring Inverse nodes (the operand sets are the same either way).
template <typename F>
void for_each_primitive(const RevProgram& prog, F&& f) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Primitive>) {
          f(node);
        } else if constexpr (std::is_same_v<T, RevProgram::Seq>) {
          for (const auto& child : node.children) for_each_primitive(child, f);
        } else if constexpr (std::is_same_v<T, RevProgram::Inverse>) {
          for_each_primitive(node.body.front(), f);
        } else {
          for (const auto& leg : node.legs) for_each_primitive(leg, f);
        }
      },
      prog.body());
}

/// Syntactic inverse: sequences reversed with children inverted, primitives
/// replaced by their inverse kind, Inverse(p) unwrapped to p, and Ccu(c, k)
/// mapped to Ccu(c, invert(k)).
inline RevProgram invert(const RevProgram& prog) {
  return std::visit(
      [&](const auto& node) -> RevProgram {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Primitive>) {
          return RevProgram::prim(node.inverted(), prog.label());
        } else if constexpr (std::is_same_v<T, RevProgram::Seq>) {
          std::vector<RevProgram> children;
          children.reserve(node.children.size());
          for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) {
            children.push_back(invert(*it));
          }
          return RevProgram::seq(std::move(children), prog.label());
        } else if constexpr (std::is_same_v<T, RevProgram::Inverse>) {
          return node.body.front();
        } else {
          return RevProgram::ccu_unchecked(node.legs[0], invert(node.legs[1]), node.ancilla,
                                           prog.label());
        }
      },
      prog.body());
}

/// Compute-copy-uncompute. The copy leg may only use additive primitives, and
/// none of them may write a cell that the compute leg reads or writes.
inline RevProgram ccu(RevProgram compute, RevProgram copy, std::vector<CellId> ancilla = {},
                      std::string label = {}) {
  std::unordered_set<std::uint64_t> touched;
  for_each_primitive(compute, [&](const Primitive& p) {
    p.for_each_operand([&](CellId c) { touched.insert(c.key()); });
  });
  for_each_primitive(copy, [&](const Primitive& p) {
    if (!is_additive(p.op)) {
      throw Error(Errc::kCopyOverlap, "copy leg uses non-additive '" + to_string(p) + "'");
    }
    if (touched.count(p.dst.key()) != 0) {
      throw Error(Errc::kCopyOverlap,
                  "copy leg writes " + to_string(p.dst) + ", which the compute leg touches");
    }
  });
  return RevProgram::ccu_unchecked(std::move(compute), std::move(copy), std::move(ancilla),
                                   std::move(label));
}

namespace detail {

inline void execute(Arena& arena, const RevProgram& prog, Direction dir) {
  try {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Primitive>) {
            arena.step(node, dir);
          } else if constexpr (std::is_same_v<T, RevProgram::Seq>) {
            if (dir == Direction::kForward) {
              for (const auto& child : node.children) execute(arena, child, dir);
            } else {
              for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) {
                execute(arena, *it, dir);
              }
            }
          } else if constexpr (std::is_same_v<T, RevProgram::Inverse>) {
            execute(arena, node.body.front(), opposite(dir));
          } else {
            arena.activate(node.ancilla);
            execute(arena, node.legs[0], Direction::kForward);
            execute(arena, node.legs[1], dir);
            execute(arena, node.legs[0], Direction::kBackward);
            arena.deactivate(node.ancilla);
          }
        },
        prog.body());
  } catch (Error& e) {
    if (!prog.label().empty()) e.push_label(prog.label());
    throw;
  }
}

}  // namespace detail

/// Interprets `prog` against `arena`. Running backward is the same as running
/// invert(prog) forward. The report covers this run only. Errors abort the run
/// where they occur; the arena is not rolled back.
inline ResourceReport run(Arena& arena, const RevProgram& prog,
                          Direction dir = Direction::kForward) {
  const std::size_t ops_before = arena.op_count();
  const std::size_t garbage_before = arena.garbage_cells();
  arena.reset_window();
  detail::execute(arena, prog, dir);

  ResourceReport report;
  report.primitive_ops = arena.op_count() - ops_before;
  report.peak_live_cells = arena.window_peak_live();
  report.persistent_cells = arena.live_count();
  report.transient_peak = report.peak_live_cells - report.persistent_cells;
  report.garbage_cells = arena.garbage_cells() - garbage_before;
  report.max_bits = arena.window_max_bits();
  return report;
}

/// Every ancilla cell declared by Ccu nodes in the tree, deduplicated.
inline std::vector<CellId> collect_ancilla(const RevProgram& prog) {
  std::vector<CellId> out;
  std::unordered_set<std::uint64_t> seen;
  auto walk = [&](auto&& self, const RevProgram& p) -> void {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, RevProgram::Seq>) {
            for (const auto& child : node.children) self(self, child);
          } else if constexpr (std::is_same_v<T, RevProgram::Inverse>) {
            self(self, node.body.front());
          } else if constexpr (std::is_same_v<T, RevProgram::Ccu>) {
            for (const CellId c : node.ancilla) {
              if (seen.insert(c.key()).second) out.push_back(c);
            }
            for (const auto& leg : node.legs) self(self, leg);
          }
        },
        p.body());
  };
  walk(walk, prog);
  return out;
}

inline std::size_t count_primitives(const RevProgram& prog) {
  std::size_t n = 0;
  for_each_primitive(prog, [&](const Primitive&) { ++n; });
  return n;
}

namespace detail {

inline void print(const RevProgram& prog, std::size_t depth, std::string& out) {
  const std::string indent(2 * depth, ' ');
  const std::string suffix = prog.label().empty() ? "" : " " + prog.label();
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Primitive>) {
          out += indent + to_string(node) + "\n";
        } else if constexpr (std::is_same_v<T, RevProgram::Seq>) {
          out += indent + "SEQ" + suffix + "\n";
          for (const auto& child : node.children) print(child, depth + 1, out);
        } else if constexpr (std::is_same_v<T, RevProgram::Inverse>) {
          out += indent + "INVERSE" + suffix + "\n";
          print(node.body.front(), depth + 1, out);
        } else {
          std::string scope;
          for (const CellId c : node.ancilla) scope += " " + to_string(c);
          out += indent + "CCU" + suffix + (scope.empty() ? "" : " ancilla" + scope) + "\n";
          out += indent + "  COMPUTE\n";
          print(node.legs[0], depth + 2, out);
          out += indent + "  COPY\n";
          print(node.legs[1], depth + 2, out);
        }
      },
      prog.body());
}

}  // namespace detail

/// Debug listing: one primitive per line, two spaces of indent per tree level.
inline std::string to_string(const RevProgram& prog) {
  std::string out;
  detail::print(prog, 0, out);
  return out;
}

}  // namespace revlin
